"""
Benchmark Models
Rows and constants for the majority and square-wave benchmarks
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cvmse.models.results import ExactValue


class MajorityCovRow(BaseModel):
    """Fold covariance and MSE of majority at (n, m)"""

    model_config = ConfigDict(frozen=True)

    n: int
    m: int
    k: int
    cov_exact: ExactValue
    cov_conditional: ExactValue
    cov_approx: Optional[float] = None
    approx_form: Optional[str] = None
    mse: ExactValue

    @model_validator(mode="after")
    def _check(self):
        if self.k * self.m != self.n:
            raise ValueError("k must equal n / m")
        if self.cov_exact.value <= 0:
            raise ValueError("majority fold covariance is positive")
        return self

    @property
    def forms_agree(self):
        return self.cov_exact.value == self.cov_conditional.value


class CentralMass(BaseModel):
    """S_r = 2^{-2r} binom(2r, r)"""

    model_config = ConfigDict(frozen=True)

    r: int = Field(ge=0)
    value: ExactValue


class SquareWaveParams(BaseModel):
    """Instance of the square-wave covariance with r = m"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    m: int = Field(ge=1)

    @model_validator(mode="after")
    def _check(self):
        if self.n % self.m or self.n < 2 * self.m:
            raise ValueError(f"need m | n and n >= 2m, got n={self.n}, m={self.m}")
        return self

    @classmethod
    def from_ratio(cls, m, R):
        return cls(n=m * (R + 2), m=m)

    @property
    def r(self):
        return self.m

    @property
    def N(self):
        return self.n - 2 * self.m

    @property
    def R(self):
        return self.N // self.m


class ThetaSeries(BaseModel):
    """Cosine coefficients C_j = exp(-pi^2 (2j+1)^2 / 8), j < J"""

    model_config = ConfigDict(frozen=True)

    J: int = Field(ge=1)

    @property
    def coefficients(self):
        j = np.arange(self.J + 1)
        return np.exp(-np.pi ** 2 * (2 * j + 1) ** 2 / 8)

    @property
    def tail_bound(self):
        C = np.exp(-np.pi ** 2 * (2 * np.arange(2) + 1) ** 2 / 8)
        next_term = np.exp(-np.pi ** 2 * (2 * (self.J + 1) + 1) ** 2 / 8)
        return float(next_term / (1 - C[1] / C[0]))


class SqConstants(BaseModel):
    """Constants of the square-wave covariance"""

    model_config = ConfigDict(frozen=True)

    c0: float
    c1: float
    C_alpha: float
    tail_bound: float

    def delta(self, R):
        """Delta(R), exponentially small in R."""
        a = 1 + 2 * R
        return float(
            2 * self.c1 * np.exp(-np.pi ** 2 * R / 2)
            + self.C_alpha / (np.pi ** 2 * a) * np.exp(-np.pi ** 2 * a / 4)
        )
