"""
Square Wave
The r-square-wave rule, its exact fold covariance and theta-series constants
"""

import logging
import math
from fractions import Fraction

import mpmath
import numpy as np

from cvmse.core.config import Defaults
from cvmse.core.errors import BudgetExceeded, InvalidFoldSize, OutOfRange, RTooSmall
from cvmse.models.benchmarks import SqConstants, SquareWaveParams, ThetaSeries
from cvmse.models.hypothesis import HypothesisMixture, LearningRule, constant_hypothesis
from cvmse.models.results import ExactValue

logger = logging.getLogger(__name__)


# --- 1. Rule ---

def epsilon_floor(u, m):
    """(-1)^t with t = floor(u / sqrt(m)), decided by t^2 m <= u^2 < (t+1)^2 m."""
    if u < 0 or m < 1:
        raise OutOfRange(f"need u >= 0 and m >= 1, got u={u}, m={m}")
    t = math.isqrt(u * u // m)
    return 1 if t % 2 == 0 else -1


def epsilon_floor_reference(u, m, prec=128):
    with mpmath.workprec(prec):
        t = int(mpmath.floor(mpmath.mpf(u) / mpmath.sqrt(m)))
    return 1 if t % 2 == 0 else -1


def square_wave_rule(r):
    """h0 iff floor(Y / sqrt(r)) is even, Y the training label sum."""
    if r < 1:
        raise OutOfRange(f"wave scale must be positive, got {r}")
    h0, h1 = HypothesisMixture.point(constant_hypothesis(0)), HypothesisMixture.point(constant_hypothesis(1))

    def train(sample):
        return h0 if epsilon_floor(sample.label_sum, r) == 1 else h1

    return LearningRule(name=f"square-wave-{r}", train=train)


# --- 2. Exact covariance ---

def _signs(top, m):
    return [epsilon_floor(u, m) for u in range(top + 1)]


def _f_numerators(N, m):
    """F(s) = sum_w binom(m, w) (2w - m) eps(s + w), so f(s) = F(s) / (m 2^(m+1))."""
    eps = _signs(N + m, m)
    weights = [math.comb(m, w) * (2 * w - m) for w in range(m + 1)]
    return [sum(c * eps[s + w] for w, c in enumerate(weights)) for s in range(N + 1)]


def f_exact(s, m):
    if s < 0 or m < 1:
        raise OutOfRange(f"need s >= 0 and m >= 1, got s={s}, m={m}")
    eps = [epsilon_floor(s + w, m) for w in range(m + 1)]
    num = sum(math.comb(m, w) * (2 * w - m) * eps[w] for w in range(m + 1))
    return ExactValue(value=Fraction(num, m * 2 ** (m + 1)))


def cov_exact_factorized(n, m):
    """Cov(Lhat_1, Lhat_2) = E_S[f(S)^2], S ~ Bin(n - 2m, 1/2), for r = m."""
    if m < 1 or n % m or n < 2 * m:
        raise InvalidFoldSize(f"need m | n and n >= 2m, got n={n}, m={m}")
    N = n - 2 * m
    F = _f_numerators(N, m)
    total = sum(math.comb(N, s) * F[s] * F[s] for s in range(N + 1))
    return ExactValue(value=Fraction(total, 2 ** N * m * m * 4 ** (m + 1)))


def _floor_sqrt_ratio(u, m):
    t = np.floor(u / np.sqrt(m)).astype(np.int64)
    t += ((t + 1) ** 2 * m <= u * u).astype(np.int64)
    t -= (t * t * m > u * u).astype(np.int64)
    return t


def cov_brute_force(n, m):
    """Fold covariance of the m-square-wave rule over all 2^n labelings."""
    if m < 1 or n % m or n < 2 * m:
        raise InvalidFoldSize(f"need m | n and n >= 2m, got n={n}, m={m}")
    if n > 18:
        raise BudgetExceeded(f"brute force covers n <= 18, got n={n}")
    codes = np.arange(2 ** n, dtype=np.int64)
    labels = (codes[:, None] >> np.arange(n)) & 1
    total = labels.sum(axis=1)
    misses = []
    for block in (slice(0, m), slice(m, 2 * m)):
        held = labels[:, block].sum(axis=1)
        predict_one = _floor_sqrt_ratio(total - held, m) % 2 == 1
        misses.append(np.where(predict_one, m - held, held))
    a1, a2 = misses
    count = 2 ** n
    num = int((a1 * a2).sum()) * count - int(a1.sum()) * int(a2.sum())
    return ExactValue(value=Fraction(num, m * m * count * count))


# --- 3. Theta function and constants ---

def theta_eval(delta, method="series", J=Defaults.THETA_TERMS):
    """Alternating shifted Gaussian lattice sum, directly or via its cosine series."""
    if J < 3:
        raise OutOfRange(f"truncation must be at least 3, got {J}")
    delta = np.asarray(delta, dtype=float)
    if method == "lattice":
        j = np.arange(-J, J + 1)
        signs = np.where(j % 2 == 0, 1.0, -1.0)
        terms = signs * np.exp(-2 * (j - delta[..., None]) ** 2)
        out = terms.sum(axis=-1)
    elif method == "series":
        j = np.arange(J + 1)
        C = ThetaSeries(J=J).coefficients
        out = np.sqrt(2 * np.pi) * (C * np.cos((2 * j + 1) * np.pi * delta[..., None])).sum(axis=-1)
    else:
        raise ValueError(f"method must be 'lattice' or 'series', got {method!r}")
    return float(out) if out.ndim == 0 else out


def squarewave_constants(J=Defaults.THETA_TERMS):
    series = ThetaSeries(J=J)
    C = series.coefficients
    c0 = 0.5 * float(np.sum(C ** 2))
    c1 = 0.25 * float(C[0] ** 2) + 0.5 * float(np.sum(C[:-1] * C[1:]))
    p = np.arange(1, J + 1)
    C_alpha = 1 + 2 * float(np.sum(np.exp(-np.pi ** 2 * p ** 2 / 4)))
    return SqConstants(c0=c0, c1=c1, C_alpha=C_alpha, tail_bound=series.tail_bound)


def predicted_cov(m, R, kappa=Defaults.SQ_KAPPA, constants=None):
    """(c0/m, Delta(R)/m + kappa m^{-3/2})."""
    if R < 1:
        raise RTooSmall("no uniform bound exists for R < 1")
    if m < 1:
        raise OutOfRange(f"m must be positive, got {m}")
    constants = constants or squarewave_constants()
    return constants.c0 / m, constants.delta(R) / m + kappa * m ** -1.5


def squarewave_row(m, R, kappa=Defaults.SQ_KAPPA, constants=None):
    params = SquareWaveParams.from_ratio(m, R)
    cov = cov_exact_factorized(params.n, m)
    value, bound = predicted_cov(m, R, kappa, constants)
    err = abs(float(cov) - value)
    return {
        "n": params.n, "m": m, "R": R,
        "cov_exact": cov.as_text(), "cov_exact_float": float(cov),
        "c0_over_m": value, "abs_err": err, "bound": bound,
        "within_bound": err <= bound,
    }


def bound_threshold_scan(R, ms, kappa=Defaults.SQ_KAPPA):
    """Smallest listed m from which the predicted bound holds for every larger listed m."""
    constants = squarewave_constants()
    rows = [squarewave_row(m, R, kappa, constants) for m in sorted(ms)]
    threshold = None
    for row in reversed(rows):
        if not row["within_bound"]:
            break
        threshold = row["m"]
    logger.info("R=%d: bound holds from m=%s on", R, threshold)
    return threshold, rows
