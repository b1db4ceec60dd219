"""
Decomposition
Five-term MSE decomposition of k-fold CV, stability parameters and the inequality suite
"""

import logging
import math
from fractions import Fraction

from cvmse.core.errors import InputMismatch, InvalidFoldSize, NotDivisible
from cvmse.engine.exact import exact_moments
from cvmse.engine.folds import partition_folds
from cvmse.engine.functionals import Functional
from cvmse.engine.montecarlo import functional_terms, mc_from_trials, mean_estimate, simulate_trials
from cvmse.engine.rules import constant_rule
from cvmse.models.hypothesis import HypothesisMixture, IntervalHypothesis, LearningRule
from cvmse.models.results import BoundCheck, DecompositionReport, ExactValue, StabilityProfile
from cvmse.models.sample import FiniteDistribution

logger = logging.getLogger(__name__)


def _mode(mode, trials, seed):
    if mode not in ("exact", "mc"):
        raise ValueError(f"mode must be 'exact' or 'mc', got {mode!r}")
    if mode == "mc" and (trials is None or seed is None):
        raise ValueError("mc mode needs trials and seed")
    return mode


def decompose(rule, dist, n, k, mode="exact", trials=None, seed=None, budget=None, threads=None):
    """MSE of k-fold CV split into stability, fold covariance, noise and correction terms."""
    _mode(mode, trials, seed)
    scheme = partition_folds(n, k)
    instance = f"{rule.name}|{dist.tag}"
    if mode == "exact":
        jm = exact_moments(rule, dist, n, k, budget)
        values = {
            "mse": jm.mse,
            "sls": jm.sls,
            "inter_fold_cov": jm.inter_fold_cov,
            "per_fold_noise": jm.per_fold_noise,
            "corr_hold": jm.corr_hold,
            "corr_risk": jm.corr_risk,
            "residual": jm.residual,
        }
        if values["residual"] != 0:
            logger.warning("nonzero exact residual %s for %s", values["residual"], instance)
        values = {name: ExactValue(value=v) for name, v in values.items()}
    else:
        arrays = simulate_trials(rule, dist, n, k, trials, seed, threads)
        terms = {
            "mse": functional_terms(arrays, Functional.MSE),
            "sls": functional_terms(arrays, Functional.SLS),
            "inter_fold_cov": functional_terms(arrays, Functional.FOLD_COV),
            "per_fold_noise": functional_terms(arrays, Functional.PER_FOLD_NOISE),
            "corr_hold": functional_terms(arrays, Functional.CORR_HOLD),
            "corr_risk": functional_terms(arrays, Functional.CORR_RISK),
        }
        terms["residual"] = terms["mse"] - (
            terms["sls"]
            + (k - 1) / k * terms["inter_fold_cov"]
            + terms["per_fold_noise"] / (k * scheme.m)
            + terms["corr_hold"]
            - terms["corr_risk"]
        )
        values = {name: mean_estimate(z, trials, seed) for name, z in terms.items()}
    return DecompositionReport(n=n, k=k, m=scheme.m, mode=mode, instance=instance, **values)


def stability_estimates(rule, dist, n, m, mode="exact", trials=None, seed=None, budget=None, threads=None):
    """Stability parameters for removal of one block of size m."""
    _mode(mode, trials, seed)
    if not 1 <= m < n:
        raise InvalidFoldSize(f"need 1 <= m < n, got m={m}, n={n}")
    if n % m:
        raise NotDivisible(f"m={m} does not divide n={n}")
    k = n // m
    instance = f"{rule.name}|{dist.tag}"
    if mode == "exact":
        jm = exact_moments(rule, dist, n, k, budget, stability=True)
        values = {
            "sls_beta": jm.sls,
            "loss_stability": jm.loss_stability,
            "hypothesis_stability": jm.hypothesis_stability,
            "risk_var_n": jm.risk_var_n,
            "risk_var_train": jm.risk_var_train,
            "mean_risk_n": jm.mean_risk_n,
            "mean_risk_train": jm.mean_risk_train,
            "risk_gap_sq": jm.risk_gap_sq,
            "bernoulli_bound": jm.bernoulli_bound,
        }
        values = {name: ExactValue(value=v) for name, v in values.items()}
    else:
        arrays = simulate_trials(rule, dist, n, k, trials, seed, threads, stability=True)
        per_trial = {
            "loss_stability": arrays.risk_gap,
            "hypothesis_stability": arrays.disagreement,
            "risk_gap_sq": arrays.risk_gap_second,
        }
        values = {name: mean_estimate(a.mean(axis=1), trials, seed) for name, a in per_trial.items()}
        values.update({
            "sls_beta": mc_from_trials(arrays, Functional.SLS),
            "risk_var_n": mc_from_trials(arrays, Functional.LOSS_VAR),
            "risk_var_train": mc_from_trials(arrays, Functional.LOSS_VAR, n - m),
            "mean_risk_n": mc_from_trials(arrays, Functional.MEAN),
            "mean_risk_train": mean_estimate(arrays.fold_risk.mean(axis=1), trials, seed),
            "bernoulli_bound": mean_estimate(
                (arrays.fold_risk * (1 - arrays.fold_risk)).mean(axis=1), trials, seed),
        })
    return StabilityProfile(n=n, m=m, instance=instance, **values)


# --- Inequality suite ---

def _sqrt(x):
    """Exact square root when x is a perfect rational square, float otherwise."""
    if isinstance(x, Fraction) and x >= 0:
        num, den = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if num * num == x.numerator and den * den == x.denominator:
            return Fraction(num, den)
    return math.sqrt(max(float(x), 0.0))


def _v(value):
    return value.value


def bound_suite(report, prof):
    """Checks (i)-(v) in order, then the exchangeable fold-covariance floor."""
    if (report.n, report.m) != (prof.n, prof.m) or report.instance != prof.instance:
        raise InputMismatch(
            f"report ({report.n}, {report.m}, {report.instance}) and profile "
            f"({prof.n}, {prof.m}, {prof.instance}) describe different instances"
        )
    n, k, m = report.n, report.k, report.m
    frac = Fraction(k - 1, k)
    s2_train, s2_n = _v(prof.risk_var_train), _v(prof.risk_var_n)
    noise = _v(report.per_fold_noise)
    cov = _v(report.inter_fold_cov)
    gap = (_v(prof.mean_risk_train) - _v(prof.mean_risk_n)) ** 2
    cross = 2 * _sqrt(s2_n * noise / m)

    return [
        BoundCheck(
            name="correction_terms",
            lhs=abs(_v(report.corr_hold) - _v(report.corr_risk)),
            rhs=frac * s2_train + cross,
        ),
        BoundCheck(name="fold_cov_lower", lhs=-Fraction(1, 4 * (n - m)), rhs=cov),
        BoundCheck(name="fold_cov_upper", lhs=cov, rhs=s2_train + Fraction(1, 4 * m)),
        BoundCheck(name="noise_bernoulli", lhs=noise, rhs=_v(prof.bernoulli_bound)),
        BoundCheck(name="bernoulli_quarter", lhs=_v(prof.bernoulli_bound), rhs=Fraction(1, 4)),
        BoundCheck(name="sls_lower", lhs=gap, rhs=_v(report.sls)),
        BoundCheck(
            name="sls_upper",
            lhs=_v(report.sls),
            rhs=(_sqrt(s2_train) + _sqrt(s2_n)) ** 2 + gap,
        ),
        BoundCheck(
            name="mse_lower",
            lhs=_v(prof.sls_beta) - Fraction(1, 2 * n) - s2_train - cross,
            rhs=_v(report.mse),
        ),
        BoundCheck(
            name="fold_cov_exchangeable_floor",
            lhs=-(s2_train + Fraction(1, 4 * m)) / (k - 1),
            rhs=cov,
        ),
    ]


# --- Fixtures ---

def constant_fixture(p):
    """Constant-zero rule against labels with miss mass p."""
    return constant_rule(0), FiniteDistribution.bernoulli(p)


_EMPTY = IntervalHypothesis(name="h0", lo=Fraction(0), hi=Fraction(0))


def _interval(p):
    # risk against the threshold concept equals p
    if p == Fraction(1, 2):
        return IntervalHypothesis(name="h1", lo=Fraction(0), hi=Fraction(1))
    if p < Fraction(1, 2):
        lo = Fraction(1, 2) + p
        return IntervalHypothesis(name=f"I({lo},1)", lo=lo, hi=Fraction(1))
    hi = p - Fraction(1, 2)
    return IntervalHypothesis(name=f"I(0,{hi})", lo=Fraction(0), hi=hi)


def anticorr_fixture(n):
    """Leave-one-out instance with squared loss stability above zero and MSE 0.

    Trained on n points the rule outputs an interval whose risk equals the label
    fraction p; trained on fewer it outputs the empty interval.
    """
    if n < 2 or n % 2:
        raise InvalidFoldSize(f"anticorrelation fixture needs an even n >= 2, got {n}")

    def train(sample):
        if len(sample) < n:
            return HypothesisMixture.point(_EMPTY)
        return HypothesisMixture.point(_interval(Fraction(sample.label_sum, n)))

    rule = LearningRule(name=f"anticorr-{n}", train=train)
    return rule, FiniteDistribution.bernoulli(Fraction(1, 2), token="u")
