"""
Result Models
Exact and estimated values, decomposition reports, stability profiles and bound checks
"""

import math
from fractions import Fraction
from typing import Any, Union

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator


class ExactValue(BaseModel):
    """Exact rational result"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: Fraction

    @field_validator("value", mode="before")
    @classmethod
    def _as_fraction(cls, v):
        if isinstance(v, int):
            return Fraction(v)
        return v

    def __float__(self):
        return float(self.value)

    def as_text(self):
        return f"{self.value.numerator}/{self.value.denominator}"


class EstimateWithError(BaseModel):
    """Monte Carlo estimate with its standard error"""

    model_config = ConfigDict(frozen=True)

    value: float
    std_error: float = Field(ge=0)
    trials: int = Field(ge=2)
    master_seed: int = Field(ge=0, lt=2 ** 64)

    def __float__(self):
        return self.value

    def as_text(self):
        return repr(self.value)

    def within(self, target, n_se):
        """True when |value - target| <= n_se standard errors (exact match if SE is 0)."""
        gap = abs(self.value - float(target))
        if self.std_error == 0:
            return gap <= 1e-12
        return gap <= n_se * self.std_error


Value = Union[ExactValue, EstimateWithError]


class DecompositionReport(BaseModel):
    """Terms of the exact MSE decomposition of k-fold CV"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mse: Value
    sls: Value
    inter_fold_cov: Value
    per_fold_noise: Value
    corr_hold: Value
    corr_risk: Value
    residual: Value
    n: int
    k: int
    m: int
    mode: str = "exact"
    instance: str = ""

    def as_row(self):
        return {
            name: getattr(self, name)
            for name in ("mse", "sls", "inter_fold_cov", "per_fold_noise",
                         "corr_hold", "corr_risk", "residual")
        }


class StabilityProfile(BaseModel):
    """Stability parameters and risk moments at sizes n and n - m"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sls_beta: Value
    loss_stability: Value
    hypothesis_stability: Value
    risk_var_n: Value
    risk_var_train: Value
    mean_risk_n: Value
    mean_risk_train: Value
    risk_gap_sq: Value
    bernoulli_bound: Value
    n: int
    m: int
    instance: str = ""


class BoundCheck(BaseModel):
    """One inequality lhs <= rhs"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    lhs: Any
    rhs: Any

    @computed_field
    @property
    def slack(self) -> Any:
        return self.rhs - self.lhs

    @computed_field
    @property
    def holds(self) -> bool:
        return self.slack >= 0

    def as_row(self):
        return {
            "name": self.name,
            "lhs": _scalar(self.lhs),
            "rhs": _scalar(self.rhs),
            "slack": _scalar(self.slack),
            "holds": self.holds,
        }


def _scalar(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return repr(float(v))
