"""
Hypothesis Models
Predictors, finite mixtures of predictors, and learning rules
"""

import itertools
from fractions import Fraction
from typing import Any, Callable, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from cvmse.core.errors import DomainMismatch


class Hypothesis(BaseModel):
    """A predictor from feature tokens to labels"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    label_domain: int = Field(default=2, ge=2)
    predictor: Optional[Callable[[Any], int]] = None
    closed_risk: Optional[Callable[[Any], Fraction]] = None

    def predict(self, x):
        if self.predictor is None:
            raise DomainMismatch(f"hypothesis {self.name} has no pointwise predictions")
        return self.predictor(x)

    def risk_closed(self, dist):
        """Closed-form risk under dist, or None when only the support sum applies."""
        if self.closed_risk is None:
            return None
        return Fraction(self.closed_risk(dist))

    def disagreement_closed(self, other, dist):
        return None


def _constant(label):
    return lambda x: label


def constant_hypothesis(label, label_domain=2):
    return Hypothesis(
        name=f"h{label}",
        label_domain=label_domain,
        predictor=_constant(label),
    )


class IntervalHypothesis(Hypothesis):
    """Indicator of the open interval (lo, hi) on [0, 1] under a uniform feature law.

    Risk is measured against the threshold concept 1{x > 1/2}.
    """

    lo: Fraction
    hi: Fraction

    def _clipped(self):
        lo, hi = max(self.lo, Fraction(0)), min(self.hi, Fraction(1))
        if hi <= lo:
            return Fraction(0), Fraction(0)
        return lo, hi

    @property
    def length(self):
        lo, hi = self._clipped()
        return hi - lo

    def _overlap(self, lo, hi):
        a, b = self._clipped()
        return max(Fraction(0), min(b, hi) - max(a, lo))

    def predict(self, x):
        lo, hi = self._clipped()
        if hi == lo:
            return 0
        if lo == 0 and hi == 1:
            return 1
        if isinstance(x, (int, float, Fraction)):
            return int(lo < x < hi)
        raise DomainMismatch(f"interval {self.name} needs a numeric feature, got {x!r}")

    def risk_closed(self, dist):
        # symmetric difference with (1/2, 1)
        half = Fraction(1, 2)
        return self.length + half - 2 * self._overlap(half, Fraction(1))

    def disagreement_closed(self, other, dist):
        if not isinstance(other, IntervalHypothesis):
            return None
        lo, hi = other._clipped()
        return self.length + other.length - 2 * self._overlap(lo, hi)


class HypothesisMixture(BaseModel):
    """Finite mixture over hypotheses with exact weights"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    atoms: Tuple[Tuple[Hypothesis, Fraction], ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_weights(self):
        for h, p in self.atoms:
            if not isinstance(p, Fraction) or p <= 0:
                raise ValueError(f"weight of {h.name} must be a positive Fraction")
        if sum(p for _, p in self.atoms) != 1:
            raise ValueError("mixture weights must sum to exactly 1")
        return self

    @classmethod
    def point(cls, hypothesis):
        return cls(atoms=((hypothesis, Fraction(1)),))

    @classmethod
    def of(cls, weighted):
        """Build from (hypothesis, weight) pairs, dropping zero weights."""
        return cls(atoms=tuple((h, Fraction(p)) for h, p in weighted if p != 0))

    @property
    def size(self):
        return len(self.atoms)

    def weights_by_name(self):
        merged = {}
        for h, p in self.atoms:
            merged[h.name] = merged.get(h.name, Fraction(0)) + p
        return merged

    def draw(self, rng):
        u = rng.random()
        acc = 0.0
        for h, p in self.atoms:
            acc += float(p)
            if u < acc:
                return h
        return self.atoms[-1][0]


class LearningRule(BaseModel):
    """Map from a sample tuple to a hypothesis mixture"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    train: Callable[[Any], HypothesisMixture]
    symmetric: bool = True
    label_domain: int = Field(default=2, ge=2)
    max_mixture_size: int = Field(default=1, ge=1)
    sampler: Optional[Callable[[Any, Any], Hypothesis]] = None

    def draw(self, sample, rng):
        """One concrete hypothesis trained on sample."""
        if self.sampler is not None:
            return self.sampler(sample, rng)
        return self.train(sample).draw(rng)

    def is_permutation_invariant(self, sample, max_permutations=720):
        reference = self.train(sample).weights_by_name()
        perms = itertools.islice(itertools.permutations(range(len(sample))), max_permutations)
        return all(self.train(sample.permuted(p)).weights_by_name() == reference for p in perms)
