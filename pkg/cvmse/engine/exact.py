"""
Exact Engine
Exhaustive expectation over ordered sample tuples in rational arithmetic
"""

import itertools
import logging
import threading
from collections import Counter
from fractions import Fraction
from typing import NamedTuple, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from cvmse.core.config import Defaults
from cvmse.core.errors import BudgetExceeded, DomainMismatch, InvalidFoldSize, OutOfRange
from cvmse.engine.folds import hypothesis_risk, partition_folds
from cvmse.engine.functionals import Functional
from cvmse.models.results import ExactValue
from cvmse.models.sample import FiniteDistribution, SampleTuple

logger = logging.getLogger(__name__)


# --- 1. Trained models ---

class TrainedModel:
    """A mixture trained on one training tuple, with its risk summaries"""

    def __init__(self, mix, dist):
        for h, _ in mix.atoms:
            if h.label_domain != dist.label_domain:
                raise DomainMismatch(f"{h.name} does not predict in Z_{dist.label_domain}")
        self.mix = mix
        self.dist = dist
        self.risks = tuple((p, hypothesis_risk(h, dist)) for h, p in mix.atoms)
        self.mean_risk = sum((p * r for p, r in self.risks), Fraction(0))
        self.second_risk = sum((p * r * r for p, r in self.risks), Fraction(0))
        self.noise = sum((p * r * (1 - r) for p, r in self.risks), Fraction(0))
        self._losses = {}

    @property
    def risk_var(self):
        return self.second_risk - self.mean_risk ** 2

    def _point_losses(self, z):
        losses = self._losses.get(z)
        if losses is None:
            losses = tuple(int(h.predict(z.x) != z.y) for h, _ in self.mix.atoms)
            self._losses[z] = losses
        return losses

    def hold_out(self, points):
        """First and second moments of the drawn hypothesis' hold-out loss."""
        misses = [0] * len(self.risks)
        for z in points:
            for a, lost in enumerate(self._point_losses(z)):
                misses[a] += lost
        m = len(points)
        mean = sum((p * Fraction(c, m) for (p, _), c in zip(self.risks, misses)), Fraction(0))
        second = sum((p * Fraction(c, m) ** 2 for (p, _), c in zip(self.risks, misses)), Fraction(0))
        return mean, second

    def against(self, other):
        """Disagreement, |risk gap| and squared gap under independent draws."""
        dis = gap = gap_sq = Fraction(0)
        for (h, p), (_, r) in zip(self.mix.atoms, self.risks):
            for (g, p2), (_, r2) in zip(other.mix.atoms, other.risks):
                w = p * p2
                closed = h.disagreement_closed(g, self.dist)
                if closed is None:
                    closed = self.dist.support_disagreement(h, g)
                dis += w * closed
                gap += w * abs(r - r2)
                gap_sq += w * (r - r2) ** 2
        return dis, gap, gap_sq


class ModelCache:
    """Trained models keyed by the contents of their training tuple"""

    def __init__(self, rule, dist):
        self.rule = rule
        self.dist = dist
        self._models = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, points):
        key = frozenset(Counter(points).items()) if self.rule.symmetric else tuple(points)
        with self._lock:
            model = self._models.get(key)
            if model is None:
                self.misses += 1
                model = TrainedModel(self.rule.train(SampleTuple(points=tuple(points))), self.dist)
                self._models[key] = model
            else:
                self.hits += 1
        return model


# --- 2. Per-sample conditional moments ---

class SampleMoments(NamedTuple):
    mse: Fraction
    sls: Fraction
    nu: Fraction
    nu_second: Fraction
    fold_loss: Tuple[Fraction, ...]
    fold_risk: Tuple[Fraction, ...]
    fold_risk_second: Tuple[Fraction, ...]
    noise: Tuple[Fraction, ...]
    bernoulli: Tuple[Fraction, ...]
    stability: Optional[Tuple[Tuple[Fraction, Fraction, Fraction], ...]]


def sample_moments(points, scheme, cache, stability=False):
    """Moments of the CV quantities conditional on one sample.

    Fold hypotheses and the full-sample hypothesis are drawn independently.
    """
    k = scheme.k
    full = cache.get(points)
    folds = []
    for i in range(k):
        model = cache.get([points[j] for j in scheme.training(i)])
        lam, lam_second = model.hold_out([points[j] for j in scheme.hold_out(i)])
        folds.append((model, lam, lam_second))

    nu_var = full.risk_var
    mean_lam = sum((lam for _, lam, _ in folds), Fraction(0)) / k
    mean_rho = sum((model.mean_risk for model, _, _ in folds), Fraction(0)) / k
    lam_var = sum((s - lam * lam for _, lam, s in folds), Fraction(0))
    rho_var = sum((model.risk_var for model, _, _ in folds), Fraction(0))

    return SampleMoments(
        mse=(mean_lam - full.mean_risk) ** 2 + lam_var / k ** 2 + nu_var,
        sls=(mean_rho - full.mean_risk) ** 2 + rho_var / k ** 2 + nu_var,
        nu=full.mean_risk,
        nu_second=full.second_risk,
        fold_loss=tuple(lam for _, lam, _ in folds),
        fold_risk=tuple(model.mean_risk for model, _, _ in folds),
        fold_risk_second=tuple(model.second_risk for model, _, _ in folds),
        noise=tuple(model.noise for model, _, _ in folds),
        bernoulli=tuple(model.mean_risk * (1 - model.mean_risk) for model, _, _ in folds),
        stability=tuple(model.against(full) for model, _, _ in folds) if stability else None,
    )


def sample_key(idx, scheme, symmetric):
    """Indices that determine every conditional moment of the sample."""
    if not symmetric:
        return tuple(idx)
    return tuple(tuple(sorted(idx[j] for j in block)) for block in scheme.blocks)


# --- 3. Joint moments ---

def _avg(values):
    values = list(values)
    return sum(values, Fraction(0)) / len(values)


class JointMoments(BaseModel):
    """Every expectation accumulated in one exhaustive pass"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    k: int
    m: int
    instance: str
    mse: Fraction
    sls: Fraction
    nu: Fraction
    nu_second: Fraction
    fold_loss: Tuple[Fraction, ...]
    fold_risk: Tuple[Fraction, ...]
    fold_risk_second: Tuple[Fraction, ...]
    noise: Tuple[Fraction, ...]
    bernoulli: Tuple[Fraction, ...]
    fold_loss_cross: Tuple[Tuple[Fraction, ...], ...]
    fold_risk_cross: Tuple[Tuple[Fraction, ...], ...]
    nu_fold_loss: Tuple[Fraction, ...]
    nu_fold_risk: Tuple[Fraction, ...]
    disagreement: Optional[Tuple[Fraction, ...]] = None
    risk_gap: Optional[Tuple[Fraction, ...]] = None
    risk_gap_second: Optional[Tuple[Fraction, ...]] = None

    def _pairs(self):
        return [(i, j) for i in range(self.k) for j in range(self.k) if i != j]

    def pair_fold_cov(self, i, j):
        """Cov(Lhat_i, Lhat_j) for one fold pair."""
        return self.fold_loss_cross[i][j] - self.fold_loss[i] * self.fold_loss[j]

    def pair_risk_cov(self, i, j):
        return self.fold_risk_cross[i][j] - self.fold_risk[i] * self.fold_risk[j]

    @property
    def inter_fold_cov(self):
        return _avg(self.pair_fold_cov(i, j) for i, j in self._pairs())

    @property
    def per_fold_noise(self):
        return _avg(self.noise)

    @property
    def corr_hold(self):
        return 2 * _avg(
            (self.nu_fold_risk[i] - self.nu * self.fold_risk[i])
            - (self.nu_fold_loss[i] - self.nu * self.fold_loss[i])
            for i in range(self.k)
        )

    @property
    def corr_risk(self):
        return Fraction(self.k - 1, self.k) * _avg(self.pair_risk_cov(i, j) for i, j in self._pairs())

    @property
    def residual(self):
        return self.mse - (
            self.sls
            + Fraction(self.k - 1, self.k) * self.inter_fold_cov
            + self.per_fold_noise / (self.k * self.m)
            + self.corr_hold
            - self.corr_risk
        )

    @property
    def mean_risk_n(self):
        return self.nu

    @property
    def mean_risk_train(self):
        return _avg(self.fold_risk)

    @property
    def risk_var_n(self):
        return self.nu_second - self.nu ** 2

    @property
    def risk_var_train(self):
        return _avg(s - r * r for s, r in zip(self.fold_risk_second, self.fold_risk))

    @property
    def bernoulli_bound(self):
        return _avg(self.bernoulli)

    def _stability(self, field):
        values = getattr(self, field)
        if values is None:
            raise OutOfRange("stability terms were not accumulated; pass stability=True")
        return _avg(values)

    @property
    def hypothesis_stability(self):
        return self._stability("disagreement")

    @property
    def loss_stability(self):
        return self._stability("risk_gap")

    @property
    def risk_gap_sq(self):
        return self._stability("risk_gap_second")


class _Accumulator:
    def __init__(self, k, stability):
        zero = Fraction(0)
        self.k = k
        self.stability = stability
        self.total = zero
        self.mse = self.sls = self.nu = self.nu_second = zero
        self.vectors = {name: [zero] * k for name in (
            "fold_loss", "fold_risk", "fold_risk_second", "noise", "bernoulli",
            "nu_fold_loss", "nu_fold_risk", "disagreement", "risk_gap", "risk_gap_second",
        )}
        self.loss_cross = [[zero] * k for _ in range(k)]
        self.risk_cross = [[zero] * k for _ in range(k)]

    def add(self, w, sm):
        v = self.vectors
        self.total += w
        self.mse += w * sm.mse
        self.sls += w * sm.sls
        self.nu += w * sm.nu
        self.nu_second += w * sm.nu_second
        for i in range(self.k):
            lam, rho = sm.fold_loss[i], sm.fold_risk[i]
            v["fold_loss"][i] += w * lam
            v["fold_risk"][i] += w * rho
            v["fold_risk_second"][i] += w * sm.fold_risk_second[i]
            v["noise"][i] += w * sm.noise[i]
            v["bernoulli"][i] += w * sm.bernoulli[i]
            v["nu_fold_loss"][i] += w * sm.nu * lam
            v["nu_fold_risk"][i] += w * sm.nu * rho
            for j in range(self.k):
                if j != i:
                    self.loss_cross[i][j] += w * lam * sm.fold_loss[j]
                    self.risk_cross[i][j] += w * rho * sm.fold_risk[j]
            if self.stability:
                dis, gap, gap_sq = sm.stability[i]
                v["disagreement"][i] += w * dis
                v["risk_gap"][i] += w * gap
                v["risk_gap_second"][i] += w * gap_sq

    def result(self, scheme, instance):
        if self.total != 1:
            raise ValueError(f"enumeration weights sum to {self.total}")
        v = {name: tuple(values) for name, values in self.vectors.items()}
        extra = {}
        if self.stability:
            extra = {name: v[name] for name in ("disagreement", "risk_gap", "risk_gap_second")}
        return JointMoments(
            n=scheme.n, k=scheme.k, m=scheme.m, instance=instance,
            mse=self.mse, sls=self.sls, nu=self.nu, nu_second=self.nu_second,
            fold_loss=v["fold_loss"], fold_risk=v["fold_risk"],
            fold_risk_second=v["fold_risk_second"], noise=v["noise"], bernoulli=v["bernoulli"],
            fold_loss_cross=tuple(map(tuple, self.loss_cross)),
            fold_risk_cross=tuple(map(tuple, self.risk_cross)),
            nu_fold_loss=v["nu_fold_loss"], nu_fold_risk=v["nu_fold_risk"],
            **extra,
        )


# --- 4. Enumeration ---

def _check_enumerable(rule, dist, n, budget):
    if not isinstance(dist, FiniteDistribution):
        raise DomainMismatch("exhaustive enumeration needs an explicit support; see to_finite()")
    budget = Defaults.ENUM_BUDGET if budget is None else budget
    terms = dist.size ** n * rule.max_mixture_size
    if terms > budget:
        raise BudgetExceeded(f"{dist.size}^{n} x {rule.max_mixture_size} terms exceed budget {budget}")
    return terms


def _tuples(dist, n):
    masses = dist.masses
    for idx in itertools.product(range(dist.size), repeat=n):
        w = Fraction(1)
        for s, c in Counter(idx).items():
            w *= masses[s] ** c
        yield idx, w


def exact_moments(rule, dist, n, k, budget=None, stability=False):
    """One exhaustive pass over D^n and all internal randomness."""
    scheme = partition_folds(n, k)
    if k < 2:
        raise InvalidFoldSize("cross-validation needs at least two folds")
    terms = _check_enumerable(rule, dist, n, budget)
    logger.debug("enumerating %d weighted terms for %s, n=%d, k=%d", terms, rule.name, n, k)

    cache = ModelCache(rule, dist)
    points = dist.points
    acc = _Accumulator(k, stability)
    seen = {}
    for idx, w in _tuples(dist, n):
        key = sample_key(idx, scheme, rule.symmetric)
        sm = seen.get(key)
        if sm is None:
            sm = sample_moments([points[i] for i in idx], scheme, cache, stability)
            seen[key] = sm
        acc.add(w, sm)

    logger.debug("%d distinct samples, model cache %d hits / %d misses",
                 len(seen), cache.hits, cache.misses)
    return acc.result(scheme, f"{rule.name}|{dist.tag}")


def exact_risk_moments(rule, dist, n, budget=None):
    """E[L_n] and E[L_n^2] for the drawn hypothesis trained on n points."""
    _check_enumerable(rule, dist, n, budget)
    cache = ModelCache(rule, dist)
    points = dist.points
    mean = second = Fraction(0)
    for idx, w in _tuples(dist, n):
        model = cache.get([points[i] for i in idx])
        mean += w * model.mean_risk
        second += w * model.second_risk
    return mean, second


def read_functional(moments, functional):
    """Read a functional off joint moments."""
    functional = Functional(functional)
    return {
        Functional.MSE: lambda: moments.mse,
        Functional.SLS: lambda: moments.sls,
        Functional.FOLD_COV: lambda: moments.inter_fold_cov,
        Functional.PER_FOLD_NOISE: lambda: moments.per_fold_noise,
        Functional.CORR_HOLD: lambda: moments.corr_hold,
        Functional.CORR_RISK: lambda: moments.corr_risk,
        Functional.LOSS_VAR: lambda: moments.risk_var_n,
        Functional.MEAN: lambda: moments.mean_risk_n,
    }[functional]()


def exact_functional(rule, dist, n, k, functional, n_prime=None, budget=None):
    """Exact expectation of one functional; LOSS_VAR uses training size n_prime (default n)."""
    functional = Functional(functional)
    m = partition_folds(n, k).m
    if functional is Functional.LOSS_VAR and n_prime not in (None, n, n - m):
        if n_prime < 1:
            raise OutOfRange(f"training size {n_prime} must be positive")
        mean, second = exact_risk_moments(rule, dist, n_prime, budget)
        return ExactValue(value=second - mean ** 2)
    moments = exact_moments(rule, dist, n, k, budget)
    if functional is Functional.LOSS_VAR and n_prime == n - m:
        return ExactValue(value=moments.risk_var_train)
    return ExactValue(value=read_functional(moments, functional))
