"""
Majority
Exact, conditional and asymptotic fold covariance of the majority rule, its minimizer and MSE
"""

import logging
import math
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from cvmse.core.config import Defaults
from cvmse.core.errors import BudgetExceeded, FormDomain, InvalidFoldSize, OutOfRange
from cvmse.engine.exact import exact_functional
from cvmse.engine.functionals import Functional
from cvmse.engine.montecarlo import check_seed, standard_error, trial_draws
from cvmse.models.benchmarks import CentralMass, MajorityCovRow
from cvmse.models.experiment import SweepResult
from cvmse.models.hypothesis import HypothesisMixture, LearningRule, constant_hypothesis
from cvmse.models.results import EstimateWithError, ExactValue
from cvmse.models.sample import FiniteDistribution

logger = logging.getLogger(__name__)

FORMS = ("binomial", "sublinear", "m1", "half", "large", "m1_asymptotic", "half_asymptotic")


def binom(a, b):
    """binom(a, b), zero outside 0 <= b <= a."""
    if b < 0 or a < 0 or b > a:
        return 0
    return math.comb(a, b)


def majority_rule(n=None):
    """h1 iff more than half the training labels are 1; ties go to h0."""
    if n is not None and n < 1:
        raise OutOfRange(f"sample size must be positive, got {n}")
    h0, h1 = HypothesisMixture.point(constant_hypothesis(0)), HypothesisMixture.point(constant_hypothesis(1))

    def train(sample):
        return h1 if 2 * sample.label_sum > len(sample) else h0

    return LearningRule(name="majority", train=train)


# --- Central binomial masses ---

def central_mass(r):
    if r < 0:
        raise OutOfRange(f"r must be nonnegative, got {r}")
    return CentralMass(r=r, value=ExactValue(value=Fraction(math.comb(2 * r, r), 4 ** r)))


def central_mass_float(r):
    return float(np.exp(gammaln(2 * r + 1) - 2 * gammaln(r + 1) - 2 * r * np.log(2)))


def _log_binom(a, b):
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


# --- Exact covariance ---

def _check_fold(n, m):
    if m < 1 or 2 * m > n:
        raise InvalidFoldSize(f"need 1 <= m <= n/2, got n={n}, m={m}")
    if n % m:
        raise InvalidFoldSize(f"m={m} does not divide n={n}")


def cov_exact(n, m):
    """Cov(Lhat_1, Lhat_2) = 2^-n sum_j binom(m-1, j)^2 binom(n-2m, floor((n-m)/2) - j)."""
    _check_fold(n, m)
    N, t = n - 2 * m, (n - m) // 2
    total = sum(
        math.comb(m - 1, j) ** 2 * binom(N, t - j)
        for j in range(max(0, t - N), min(m - 1, t) + 1)
    )
    return ExactValue(value=Fraction(total, 2 ** n))


def cov_conditional(n, m):
    """Cov = (1/4) E_Y[P(Bin(m-1, 1/2) = floor((n-m)/2) - Y)^2], Y ~ Bin(n-2m, 1/2)."""
    _check_fold(n, m)
    N, t = n - 2 * m, (n - m) // 2
    total = Fraction(0)
    for y in range(N + 1):
        hit = Fraction(binom(m - 1, t - y), 2 ** (m - 1))
        total += Fraction(math.comb(N, y), 2 ** N) * hit * hit
    return ExactValue(value=total / 4)


def cov_brute_force(n, m):
    """Fold covariance by enumerating all 2^n labelings."""
    _check_fold(n, m)
    if n > 16:
        raise BudgetExceeded(f"brute force covers n <= 16, got n={n}")
    codes = np.arange(2 ** n, dtype=np.int64)
    labels = (codes[:, None] >> np.arange(n)) & 1
    total = labels.sum(axis=1)
    misses = []
    for block in (slice(0, m), slice(m, 2 * m)):
        held = labels[:, block].sum(axis=1)
        predict_one = 2 * (total - held) > n - m
        misses.append(np.where(predict_one, m - held, held))
    a1, a2 = misses
    count = 2 ** n
    num = int((a1 * a2).sum()) * count - int(a1.sum()) * int(a2.sum())
    return ExactValue(value=Fraction(num, m * m * count * count))


def cov_m1_closed(n):
    """2^-n binom(n-2, floor((n-1)/2)), the exact m = 1 covariance."""
    if n < 2:
        raise InvalidFoldSize(f"need n >= 2, got {n}")
    return ExactValue(value=Fraction(math.comb(n - 2, (n - 1) // 2), 2 ** n))


def cov_half_closed(n):
    """(2^-(n/2-1) binom(n/2-1, floor(n/4)))^2 / 4, the exact m = n/2 covariance."""
    if n < 2 or n % 2:
        raise InvalidFoldSize(f"need an even n >= 2, got {n}")
    h = n // 2
    mass = Fraction(math.comb(h - 1, n // 4), 2 ** (h - 1))
    return ExactValue(value=mass * mass / 4)


# --- Approximations ---

def cov_approx(n, m, form):
    if form not in FORMS:
        raise FormDomain(f"unknown form {form!r}; choose from {', '.join(FORMS)}")
    if m < 1 or 2 * m > n:
        raise FormDomain(f"need 1 <= m <= n/2, got n={n}, m={m}")
    if form in ("m1", "m1_asymptotic") and m != 1:
        raise FormDomain(f"form {form} needs m = 1")
    if form in ("half", "half_asymptotic") and 2 * m != n:
        raise FormDomain(f"form {form} needs m = n/2")
    if form.endswith("_asymptotic") and n < 3:
        raise FormDomain(f"form {form} needs n >= 3")
    if form in ("sublinear", "large") and not (2 <= m and 3 * m <= n):
        raise FormDomain(f"form {form} needs 2 <= m <= n/3")

    if form == "binomial":
        return central_mass_float(m - 1) / (2 * math.sqrt(math.pi * (2 * n - 3 * m)))
    if form == "large":
        return 1 / (2 * math.pi * math.sqrt((m - 1) * (2 * n - 3 * m)))
    if form == "sublinear":
        return cov_approx(n, m, "large") * (1 - 1 / (8 * (m - 1)))
    if form == "m1":
        a = (n - 1) // 2
        return float(np.exp(_log_binom(n - 2, a) - n * np.log(2)))
    if form == "m1_asymptotic":
        return math.sqrt(1 / (8 * math.pi * (n - 2)))
    if form == "half":
        h = n // 2
        mass = np.exp(_log_binom(h - 1, n // 4) - (h - 1) * np.log(2))
        return float(mass * mass / 4)
    return 1 / (math.pi * (n - 2))


def default_form(n, m):
    if m == 1:
        return "m1"
    if 2 * m == n:
        return "half"
    if 3 * m <= n:
        return "sublinear"
    return "binomial"


# --- Tables ---

def mse_majority(n, m):
    """((k-1)/k) Cov + 1/(4n) under Ber(1/2) labels."""
    _check_fold(n, m)
    k = n // m
    return ExactValue(value=Fraction(k - 1, k) * cov_exact(n, m).value + Fraction(1, 4 * n))


def majority_row(n, m):
    exact = cov_exact(n, m)
    conditional = cov_conditional(n, m)
    if exact.value != conditional.value:
        logger.warning("conditional form differs from exact covariance at n=%d, m=%d", n, m)
    form = default_form(n, m)
    return MajorityCovRow(
        n=n, m=m, k=n // m,
        cov_exact=exact,
        cov_conditional=conditional,
        cov_approx=cov_approx(n, m, form),
        approx_form=form,
        mse=mse_majority(n, m),
    )


def fold_sizes(n):
    """Divisors m of n with m <= n/2."""
    return [m for m in range(1, n // 2 + 1) if n % m == 0]


def minimize_cov(n):
    """Argmin of the exact fold covariance over admissible fold sizes."""
    if n < 2:
        raise OutOfRange(f"need n >= 2, got {n}")
    if n > Defaults.EXACT_CROSSOVER_N:
        logger.info("n=%d is above the exact crossover; rows stay exact but may be slow", n)
    table = [majority_row(n, m) for m in fold_sizes(n)]
    best = min(table, key=lambda row: (row.cov_exact.value, row.m))
    return best.m, best.k, table


# --- Off the worst case ---

def mse_majority_mc(n, m, p, trials, seed, chunk=None):
    """Majority CV MSE under Ber(p) labels by simulating block label counts.

    Trial t draws from (seed, t); `chunk` only sets the batch size.
    """
    check_seed(seed, trials)
    _check_fold(n, m)
    p = float(p)
    k = n // m
    chunk = chunk or Defaults.MC_CHUNK
    values = []
    for start in range(0, trials, chunk):
        held = trial_draws(seed, start, min(start + chunk, trials), lambda rng: rng.binomial(m, p, size=k))
        total = held.sum(axis=1)
        fold_one = 2 * (total[:, None] - held) > n - m
        loss = np.where(fold_one, m - held, held) / m
        full_one = 2 * total > n
        risk = np.where(full_one, 1 - p, p)
        values.append((loss.mean(axis=1) - risk) ** 2)
    z = np.concatenate(values)
    return EstimateWithError(
        value=float(z.mean()),
        std_error=standard_error(z, trials),
        trials=trials,
        master_seed=seed,
    )


def _sweep_mse(n, k, p, trials, seed, budget):
    m = n // k
    if p == Fraction(1, 2):
        v = mse_majority(n, m)
        return v, float(v), 0.0, "closed-form"
    budget = Defaults.ENUM_BUDGET if budget is None else budget
    if 2 ** n <= budget:
        v = exact_functional(majority_rule(n), FiniteDistribution.bernoulli(p), n, k, Functional.MSE, budget=budget)
        return v, float(v), 0.0, "exact"
    est = mse_majority_mc(n, m, p, trials, seed)
    return est, est.value, est.std_error, "mc"


def minimax_sweep(n, ks, ps=(Fraction(1, 2),), trials=Defaults.TRIALS, seed=Defaults.SEED, budget=None):
    """Worst case over label laws of the majority CV MSE, minimized over k."""
    rows = []
    for k in ks:
        if k < 2 or n % k:
            raise InvalidFoldSize(f"k={k} must divide n={n} and be at least 2")
        for p in ps:
            p = Fraction(p)
            value, as_float, se, method = _sweep_mse(n, k, p, trials, seed, budget)
            rows.append({
                "n": n, "k": k, "m": n // k, "p": f"{p.numerator}/{p.denominator}",
                "mse": value.as_text(), "mse_float": as_float, "std_error": se,
                "method": method, "mse_scaled": as_float * n / math.sqrt(k),
            })
    worst = {}
    for row in rows:
        worst[row["k"]] = max(worst.get(row["k"], float("-inf")), row["mse_float"])
    argmin_k = min(worst, key=lambda k: (worst[k], k))
    argmin_k_cov = min(ks, key=lambda k: (cov_exact(n, n // k).value, k))
    logger.info("n=%d: minimax proxy %.6g at k=%d, covariance argmin k=%d",
                n, worst[argmin_k], argmin_k, argmin_k_cov)
    return SweepResult(
        rows=tuple(rows),
        minimax_proxy=worst[argmin_k],
        argmin_k=argmin_k,
        argmin_k_cov=argmin_k_cov,
    )
