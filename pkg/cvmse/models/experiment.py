"""
Experiment Models
Validated experiment configuration and sweep results
"""

from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

EXPERIMENTS = (
    "majority-table",
    "majority-minimizer",
    "linear-mse",
    "rank-table",
    "squarewave-cov",
    "decompose",
    "minimax-sweep",
)

FIXTURES = ("majority", "anticorr", "constant")


class ExperimentConfig(BaseModel):
    """Parameters for one experiment run"""

    model_config = ConfigDict(frozen=True)

    subcommand: str
    n: List[int] = Field(default_factory=list)
    k: List[int] = Field(default_factory=list)
    m: List[int] = Field(default_factory=list)
    q: List[int] = Field(default_factory=list)
    d: List[int] = Field(default_factory=list)
    p: List[str] = Field(default_factory=list)
    ratio: List[int] = Field(default_factory=list)
    trials: int = Field(default=100_000, ge=2)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    out: str = "results/out"
    format: str = "csv"
    budget: int = Field(default=2 ** 24, ge=1)
    threads: int = Field(default=1, ge=1)
    fixture: Optional[str] = None
    mode: Optional[str] = None

    @field_validator("subcommand")
    @classmethod
    def _known(cls, v):
        if v not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {v!r}")
        return v

    @field_validator("fixture")
    @classmethod
    def _fixture(cls, v):
        if v is not None and v not in FIXTURES:
            raise ValueError(f"fixture must be one of {', '.join(FIXTURES)}")
        return v

    @field_validator("mode")
    @classmethod
    def _mode(cls, v):
        if v is not None and v not in ("exact", "mc"):
            raise ValueError("mode must be exact or mc")
        return v

    @field_validator("format")
    @classmethod
    def _format(cls, v):
        if v not in ("csv", "svg", "both"):
            raise ValueError("format must be csv, svg or both")
        return v

    @field_validator("n", "k", "m", "q", "d", "ratio")
    @classmethod
    def _positive(cls, values):
        if any(v < 0 for v in values):
            raise ValueError("sizes must be nonnegative")
        return values

    @model_validator(mode="after")
    def _per_subcommand(self):
        need = {
            "majority-table": ("n",),
            "majority-minimizer": ("n",),
            "linear-mse": ("n", "q", "d"),
            "rank-table": ("n", "d", "q"),
            "squarewave-cov": ("m",),
            "decompose": ("n", "k"),
            "minimax-sweep": ("n", "k"),
        }[self.subcommand]
        missing = [name for name in need if not getattr(self, name)]
        if missing:
            raise ValueError(f"{self.subcommand} needs --{', --'.join(missing)}")
        return self

    @property
    def wants_csv(self):
        return self.format in ("csv", "both")

    @property
    def wants_svg(self):
        return self.format in ("svg", "both")


class SweepResult(BaseModel):
    """Rows of a sweep plus its minimax proxy over k"""

    model_config = ConfigDict(frozen=True)

    rows: Tuple[Dict[str, Any], ...]
    minimax_proxy: Optional[float] = None
    argmin_k: Optional[int] = None
    argmin_k_cov: Optional[int] = None

    @model_validator(mode="after")
    def _consistent(self):
        if self.minimax_proxy is None:
            return self
        worst = {}
        for row in self.rows:
            worst[row["k"]] = max(worst.get(row["k"], float("-inf")), row["mse_float"])
        k_best = min(worst, key=lambda k: (worst[k], k))
        if worst[k_best] != self.minimax_proxy or k_best != self.argmin_k:
            raise ValueError("minimax_proxy disagrees with its rows")
        return self
