"""
Prime Field Models
Field spec, matrices, rank laws, linear hypotheses and the uniform feature law
"""

import itertools
from fractions import Fraction
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cvmse.core.errors import DomainMismatch
from cvmse.models.hypothesis import Hypothesis
from cvmse.models.sample import FiniteDistribution, LabeledPoint, SampleTuple


def is_prime(q):
    if q < 2:
        return False
    i = 2
    while i * i <= q:
        if q % i == 0:
            return False
        i += 1
    return True


class FieldSpec(BaseModel):
    """Prime modulus q"""

    model_config = ConfigDict(frozen=True)

    q: int

    @field_validator("q")
    @classmethod
    def _prime(cls, q):
        if not is_prime(q):
            raise ValueError(f"q={q} is not prime")
        return q

    def inverses(self):
        """Table t with t[a] * a = 1 mod q for a != 0."""
        table = np.zeros(self.q, dtype=np.int64)
        for a in range(1, self.q):
            table[a] = pow(a, -1, self.q)
        return table


class FqMatrix(BaseModel):
    """Matrix with entries in Z_q"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    field: FieldSpec
    entries: np.ndarray

    @model_validator(mode="after")
    def _check_entries(self):
        if self.entries.ndim != 2:
            raise ValueError("entries must be two-dimensional")
        if self.entries.size and (self.entries.min() < 0 or self.entries.max() >= self.field.q):
            raise ValueError(f"entries must lie in [0, {self.field.q})")
        return self

    @classmethod
    def of(cls, rows, q):
        arr = np.array(rows, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        return cls(field=FieldSpec(q=q), entries=arr)

    @property
    def shape(self):
        return self.entries.shape


class RankDistribution(BaseModel):
    """Law of the rank of a uniform n1 x n2 matrix over F_q"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    q: int
    n1: int = Field(ge=0)
    n2: int = Field(ge=0)
    probs: Dict[int, Fraction]

    @model_validator(mode="after")
    def _check_total(self):
        if set(self.probs) != set(range(min(self.n1, self.n2) + 1)):
            raise ValueError("ranks must cover 0..min(n1, n2)")
        if any(not 0 <= p <= 1 for p in self.probs.values()):
            raise ValueError("probabilities must lie in [0, 1]")
        if sum(self.probs.values()) != 1:
            raise ValueError("rank probabilities must sum to 1")
        return self

    def expectation(self, fn):
        return sum((p * fn(r) for r, p in self.probs.items()), Fraction(0))


def _linear_predictor(coefficients, q):
    a = np.array(coefficients, dtype=np.int64)
    return lambda x: int(np.dot(a, np.asarray(x, dtype=np.int64)) % q)


class LinearHypothesis(Hypothesis):
    """x -> <a, x> mod q"""

    coefficients: Tuple[int, ...]
    q: int

    @classmethod
    def of(cls, coefficients, q):
        coefficients = tuple(int(c) % q for c in coefficients)
        return cls(
            name="lin(" + ",".join(map(str, coefficients)) + ")",
            label_domain=q,
            predictor=_linear_predictor(coefficients, q),
            coefficients=coefficients,
            q=q,
        )

    @property
    def d(self):
        return len(self.coefficients)

    def risk_closed(self, dist):
        if isinstance(dist, UniformFieldDistribution):
            return dist.linear_risk(self)
        return None


class SolutionCoset(BaseModel):
    """Solutions of X b = y: particular + span(basis)"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    q: int
    particular: np.ndarray
    basis: np.ndarray

    @property
    def d(self):
        return self.particular.shape[0]

    @property
    def dimension(self):
        return self.basis.shape[0]

    @property
    def size(self):
        return self.q ** self.dimension

    def element(self, coefficients):
        c = np.asarray(coefficients, dtype=np.int64)
        return (self.particular + c @ self.basis) % self.q

    def elements(self):
        for c in itertools.product(range(self.q), repeat=self.dimension):
            yield self.element(np.array(c, dtype=np.int64).reshape(self.dimension))

    def sample(self, rng):
        c = rng.integers(0, self.q, size=self.dimension)
        return self.element(c)


class UniformFieldDistribution(BaseModel):
    """Features uniform on F_q^d, labels <truth, x> mod q"""

    model_config = ConfigDict(frozen=True)

    d: int = Field(ge=1)
    q: int
    truth: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def _check(self):
        FieldSpec(q=self.q)
        if self.truth and len(self.truth) != self.d:
            raise ValueError("truth must have length d")
        return self

    @property
    def ground_truth(self):
        return self.truth or (0,) * self.d

    @property
    def label_domain(self):
        return self.q

    @property
    def tag(self):
        return f"uniform-F{self.q}^{self.d}"

    def labels_for(self, X):
        return (X @ np.array(self.ground_truth, dtype=np.int64)) % self.q

    def draw_features(self, rng, n):
        return rng.integers(0, self.q, size=(n, self.d))

    def draw(self, rng, n):
        X = self.draw_features(rng, n)
        y = self.labels_for(X)
        return SampleTuple(points=tuple(
            LabeledPoint(x=tuple(int(v) for v in row), y=int(label)) for row, label in zip(X, y)
        ))

    def linear_risk(self, hypothesis):
        """Two distinct linear functionals agree on a 1/q fraction of F_q^d."""
        if hypothesis.q != self.q or hypothesis.d != self.d:
            raise DomainMismatch(f"{hypothesis.name} does not live on F_{self.q}^{self.d}")
        if tuple(hypothesis.coefficients) == tuple(self.ground_truth):
            return Fraction(0)
        return 1 - Fraction(1, self.q)

    def support_risk(self, hypothesis):
        closed = hypothesis.risk_closed(self)
        if closed is None:
            raise DomainMismatch(f"{hypothesis.name} has no closed-form risk under {self.tag}")
        return closed

    def support_disagreement(self, h, g):
        if not (isinstance(h, LinearHypothesis) and isinstance(g, LinearHypothesis)):
            raise DomainMismatch("disagreement under the uniform law needs linear hypotheses")
        if h.coefficients == g.coefficients:
            return Fraction(0)
        return 1 - Fraction(1, self.q)

    def to_finite(self):
        """Explicit q^d-point support for the exhaustive engine."""
        mass = Fraction(1, self.q ** self.d)
        truth = np.array(self.ground_truth, dtype=np.int64)
        support = []
        for x in itertools.product(range(self.q), repeat=self.d):
            y = int(np.dot(truth, x) % self.q)
            support.append((LabeledPoint(x=tuple(x), y=y), mass))
        return FiniteDistribution(support=tuple(support), label_domain=self.q)
