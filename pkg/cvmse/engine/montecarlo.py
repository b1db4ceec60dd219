"""
Monte Carlo Engine
Seeded simulation of per-sample conditional moments and plug-in functionals
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from cvmse.core.config import Defaults, get_settings
from cvmse.core.errors import InvalidFoldSize, OutOfRange
from cvmse.engine.exact import ModelCache, sample_key, sample_moments
from cvmse.engine.folds import partition_folds
from cvmse.engine.functionals import Functional
from cvmse.models.results import EstimateWithError
from cvmse.models.sample import FiniteDistribution

logger = logging.getLogger(__name__)


def check_seed(seed, trials):
    if not 0 <= seed < 2 ** 64:
        raise OutOfRange(f"seed {seed} is not a 64-bit unsigned integer")
    if trials < 2:
        raise OutOfRange(f"need at least two trials, got {trials}")


def trial_rng(seed, trial):
    """Generator owned by one trial; depends only on (seed, trial)."""
    return np.random.default_rng([seed, trial])


def trial_draws(seed, start, stop, draw):
    """Stack draw(rng) over trials start..stop-1, each with its own generator.

    Tuple-valued draws come back as a tuple of stacked arrays.
    """
    parts = [draw(trial_rng(seed, t)) for t in range(start, stop)]
    if isinstance(parts[0], tuple):
        return tuple(np.stack(column) for column in zip(*parts))
    return np.stack(parts)


def run_chunked(work, trials, threads=None, chunk=None):
    """Apply work(start, stop) over fixed-size chunks and concatenate in order."""
    threads = threads or get_settings().THREADS
    chunk = chunk or Defaults.MC_CHUNK
    bounds = [(start, min(start + chunk, trials)) for start in range(0, trials, chunk)]
    logger.debug("%d trials in %d chunks on %d threads", trials, len(bounds), threads)
    if threads <= 1:
        parts = [work(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(lambda ab: work(*ab), bounds))
    return np.concatenate(parts, axis=0)


class TrialArrays(BaseModel):
    """Per-trial conditional moments, one row per sample"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    k: int
    m: int
    trials: int = Field(ge=2)
    seed: int
    mse: np.ndarray
    sls: np.ndarray
    nu: np.ndarray
    nu_var: np.ndarray
    fold_loss: np.ndarray
    fold_risk: np.ndarray
    fold_risk_var: np.ndarray
    noise: np.ndarray
    disagreement: Optional[np.ndarray] = None
    risk_gap: Optional[np.ndarray] = None
    risk_gap_second: Optional[np.ndarray] = None

    @classmethod
    def from_rows(cls, rows, n, k, m, trials, seed):
        blocks = [rows[:, 4 + b * k:4 + (b + 1) * k] for b in range((rows.shape[1] - 4) // k)]
        extra = {}
        if len(blocks) == 7:
            extra = dict(disagreement=blocks[4], risk_gap=blocks[5], risk_gap_second=blocks[6])
        return cls(
            n=n, k=k, m=m, trials=trials, seed=seed,
            mse=rows[:, 0], sls=rows[:, 1], nu=rows[:, 2], nu_var=rows[:, 3],
            fold_loss=blocks[0], fold_risk=blocks[1], fold_risk_var=blocks[2], noise=blocks[3],
            **extra,
        )


def _row(sm):
    values = [sm.mse, sm.sls, sm.nu, sm.nu_second - sm.nu ** 2]
    values += list(sm.fold_loss) + list(sm.fold_risk)
    values += [s - r * r for s, r in zip(sm.fold_risk_second, sm.fold_risk)]
    values += list(sm.noise)
    if sm.stability is not None:
        for part in range(3):
            values += [terms[part] for terms in sm.stability]
    return np.array([float(v) for v in values])


def simulate_trials(rule, dist, n, k, trials, seed, threads=None, chunk=None, stability=False):
    """Draw `trials` samples of size n and record their conditional moments."""
    check_seed(seed, trials)
    scheme = partition_folds(n, k)
    if k < 2:
        raise InvalidFoldSize("cross-validation needs at least two folds")
    cache = ModelCache(rule, dist)
    finite = isinstance(dist, FiniteDistribution)
    points = dist.points if finite else None
    width = 4 + (7 if stability else 4) * k
    rows_by_key = {}
    lock = threading.Lock()

    def work(start, stop):
        out = np.empty((stop - start, width))
        for t in range(start, stop):
            rng = trial_rng(seed, t)
            if finite:
                idx = dist.draw_indices(rng, n)
                key = sample_key(idx, scheme, rule.symmetric)
                with lock:
                    row = rows_by_key.get(key)
                if row is None:
                    row = _row(sample_moments([points[i] for i in idx], scheme, cache, stability))
                    with lock:
                        row = rows_by_key.setdefault(key, row)
            else:
                row = _row(sample_moments(list(dist.draw(rng, n)), scheme, cache, stability))
            out[t - start] = row
        return out

    rows = run_chunked(work, trials, threads, chunk)
    return TrialArrays.from_rows(rows, n, k, scheme.m, trials, seed)


# --- Estimators ---

def standard_error(z, trials):
    """Sample standard error of the mean; 0 when z is constant up to rounding."""
    z = np.asarray(z, dtype=float)
    scale = max(1.0, float(np.max(np.abs(z))))
    if np.ptp(z) <= 1e-12 * scale:
        return 0.0
    return float(np.std(z, ddof=1) / np.sqrt(trials))


def mean_estimate(z, trials, seed):
    return EstimateWithError(
        value=float(np.mean(z)), std_error=standard_error(z, trials), trials=trials, master_seed=seed,
    )


def _centered(a):
    return a - a.mean(axis=0)


def _pair_cov_terms(a):
    """Per-trial terms whose mean is the fold-pair averaged sample covariance."""
    t, k = a.shape
    c = _centered(a)
    s = c.sum(axis=1)
    pairs = (s * s - (c * c).sum(axis=1)) / (k * (k - 1))
    return pairs * t / (t - 1)


def functional_terms(arrays, functional, loss_var_size=None):
    """Per-trial terms whose mean estimates the functional without bias."""
    functional = Functional(functional)
    t, k = arrays.trials, arrays.k
    scale = t / (t - 1)
    if functional is Functional.MSE:
        z = arrays.mse
    elif functional is Functional.SLS:
        z = arrays.sls
    elif functional is Functional.MEAN:
        z = arrays.nu
    elif functional is Functional.PER_FOLD_NOISE:
        z = arrays.noise.mean(axis=1)
    elif functional is Functional.FOLD_COV:
        z = _pair_cov_terms(arrays.fold_loss)
    elif functional is Functional.CORR_RISK:
        z = (k - 1) / k * _pair_cov_terms(arrays.fold_risk)
    elif functional is Functional.CORR_HOLD:
        gap = (_centered(arrays.fold_risk) - _centered(arrays.fold_loss)).mean(axis=1)
        z = 2 * (arrays.nu - arrays.nu.mean()) * gap * scale
    elif loss_var_size in (None, arrays.n):
        z = arrays.nu_var + (arrays.nu - arrays.nu.mean()) ** 2 * scale
    else:
        z = (arrays.fold_risk_var + _centered(arrays.fold_risk) ** 2 * scale).mean(axis=1)
    return z


def mc_from_trials(arrays, functional, loss_var_size=None):
    z = functional_terms(arrays, functional, loss_var_size)
    return mean_estimate(z, arrays.trials, arrays.seed)


def _simulate_risk(rule, dist, n_prime, trials, seed, threads=None):
    check_seed(seed, trials)
    cache = ModelCache(rule, dist)

    def work(start, stop):
        out = np.empty((stop - start, 2))
        for t in range(start, stop):
            model = cache.get(list(dist.draw(trial_rng(seed, t), n_prime)))
            out[t - start] = float(model.mean_risk), float(model.risk_var)
        return out

    return run_chunked(work, trials, threads)


def mc_functional(rule, dist, n, k, functional, trials, seed, n_prime=None, threads=None):
    """Monte Carlo estimate of one functional; output ignores `threads`."""
    functional = Functional(functional)
    m = partition_folds(n, k).m
    if functional is Functional.LOSS_VAR and n_prime not in (None, n, n - m):
        rows = _simulate_risk(rule, dist, n_prime, trials, seed, threads)
        z = rows[:, 1] + (rows[:, 0] - rows[:, 0].mean()) ** 2 * trials / (trials - 1)
        return mean_estimate(z, trials, seed)
    arrays = simulate_trials(rule, dist, n, k, trials, seed, threads)
    return mc_from_trials(arrays, functional, n_prime)
