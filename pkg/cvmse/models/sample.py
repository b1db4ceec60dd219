"""
Sample Models
Labeled points, sample tuples, finite distributions and fold schemes
"""

from fractions import Fraction
from functools import cached_property
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cvmse.core.errors import NotDivisible, OutOfRange


class LabeledPoint(BaseModel):
    """One observation z = (x, y)"""

    model_config = ConfigDict(frozen=True)

    x: Union[Tuple[int, ...], str]
    y: int = Field(ge=0)


class SampleTuple(BaseModel):
    """Ordered sample S^n"""

    model_config = ConfigDict(frozen=True)

    points: Tuple[LabeledPoint, ...] = Field(min_length=1)

    @classmethod
    def from_labels(cls, labels, token="x"):
        return cls(points=tuple(LabeledPoint(x=token, y=int(y)) for y in labels))

    @property
    def n(self):
        return len(self.points)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def labels(self):
        return tuple(p.y for p in self.points)

    @property
    def label_sum(self):
        return sum(p.y for p in self.points)

    def subset(self, indices):
        return SampleTuple(points=tuple(self.points[i] for i in indices))

    def permuted(self, perm):
        return SampleTuple(points=tuple(self.points[i] for i in perm))

    def feature_matrix(self):
        """Stack vector features into an (n, d) integer array."""
        return np.array([p.x for p in self.points], dtype=np.int64)

    def label_vector(self):
        return np.array(self.labels, dtype=np.int64)


class FiniteDistribution(BaseModel):
    """Exact-mass distribution over labeled points"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    support: Tuple[Tuple[LabeledPoint, Fraction], ...] = Field(min_length=1)
    label_domain: int = Field(default=2, ge=2)

    @model_validator(mode="after")
    def _check_masses(self):
        points = [z for z, _ in self.support]
        if len(set(points)) != len(points):
            raise ValueError("support points must be distinct")
        for z, mass in self.support:
            if not isinstance(mass, Fraction) or mass <= 0:
                raise ValueError(f"mass of {z} must be a positive Fraction")
            if z.y >= self.label_domain:
                raise ValueError(f"label {z.y} outside domain {self.label_domain}")
        if sum(mass for _, mass in self.support) != 1:
            raise ValueError("masses must sum to exactly 1")
        return self

    @classmethod
    def bernoulli(cls, p, token="x"):
        """Single feature token; label 1 carries mass p."""
        p = Fraction(p)
        if not 0 <= p <= 1:
            raise OutOfRange(f"label probability {p} outside [0, 1]")
        support = [
            (LabeledPoint(x=token, y=y), mass)
            for y, mass in ((0, 1 - p), (1, p))
            if mass > 0
        ]
        return cls(support=tuple(support))

    @property
    def size(self):
        return len(self.support)

    @property
    def points(self):
        return tuple(z for z, _ in self.support)

    @property
    def masses(self):
        return tuple(mass for _, mass in self.support)

    @cached_property
    def _probabilities(self):
        probs = np.array([float(m) for m in self.masses])
        return probs / probs.sum()

    @property
    def tag(self):
        body = ",".join(f"{z.x}:{z.y}@{mass}" for z, mass in self.support)
        return f"finite[{body}]"

    def support_risk(self, hypothesis):
        """Support-sum 0-1 risk of a single hypothesis."""
        return sum(
            (mass for z, mass in self.support if hypothesis.predict(z.x) != z.y),
            Fraction(0),
        )

    def support_disagreement(self, h, g):
        return sum(
            (mass for z, mass in self.support if h.predict(z.x) != g.predict(z.x)),
            Fraction(0),
        )

    def draw_indices(self, rng, n):
        return rng.choice(self.size, size=n, p=self._probabilities)

    def draw(self, rng, n):
        idx = self.draw_indices(rng, n)
        return SampleTuple(points=tuple(self.support[i][0] for i in idx))

    def reordered(self, order):
        return FiniteDistribution(
            support=tuple(self.support[i] for i in order),
            label_domain=self.label_domain,
        )


class FoldScheme(BaseModel):
    """Contiguous partition of range(n) into k blocks of size m"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    k: int = Field(ge=1)
    m: int = Field(ge=1)
    blocks: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_partition(self):
        if self.k * self.m != self.n or len(self.blocks) != self.k:
            raise ValueError("blocks must be k blocks of size n/k")
        flat = [i for block in self.blocks for i in block]
        if sorted(flat) != list(range(self.n)):
            raise ValueError("blocks must partition range(n)")
        if any(len(block) != self.m for block in self.blocks):
            raise ValueError("every block must have size m")
        return self

    @classmethod
    def contiguous(cls, n, k):
        if n < 1 or k < 1:
            raise OutOfRange(f"need n >= 1 and k >= 1, got n={n}, k={k}")
        if n % k:
            raise NotDivisible(f"k={k} does not divide n={n}")
        m = n // k
        blocks = tuple(tuple(range(i * m, (i + 1) * m)) for i in range(k))
        return cls(n=n, k=k, m=m, blocks=blocks)

    def hold_out(self, i):
        return self.blocks[i]

    def training(self, i):
        return tuple(j for b, block in enumerate(self.blocks) if b != i for j in block)
