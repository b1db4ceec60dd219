"""
Verification
Desk-scale invariant checks per module and a machine-readable report
"""

import logging
from fractions import Fraction

import numpy as np
import orjson
from scipy.stats import chisquare

from cvmse import __version__, linfield, majority, squarewave
from cvmse.core.config import Defaults
from cvmse.core.errors import CVMSEError, InvalidFoldSize, UsageError
from cvmse.decomposition import anticorr_fixture, bound_suite, decompose, stability_estimates
from cvmse.engine.exact import exact_functional, exact_moments
from cvmse.engine.folds import partition_folds
from cvmse.engine.functionals import Functional
from cvmse.engine.montecarlo import mc_functional
from cvmse.engine.rules import constant_rule, label_count_rule, random_label_count_table
from cvmse.models.field import FqMatrix
from cvmse.models.sample import FiniteDistribution, LabeledPoint, SampleTuple

logger = logging.getLogger(__name__)

HALF = FiniteDistribution.bernoulli(Fraction(1, 2))
THIRD = FiniteDistribution.bernoulli(Fraction(1, 3))
THREE_POINTS = FiniteDistribution(support=(
    (LabeledPoint(x="a", y=0), Fraction(1, 2)),
    (LabeledPoint(x="b", y=1), Fraction(1, 3)),
    (LabeledPoint(x="a", y=1), Fraction(1, 6)),
))


def _divisors(n):
    return [k for k in range(2, n + 1) if n % k == 0]


# --- 1. core ---

def _core():
    yield "fold_partition", all(
        sorted(i for block in partition_folds(n, k).blocks for i in block) == list(range(n))
        for n in range(2, 13) for k in _divisors(n)
    )
    p = Fraction(1, 3)
    yield "constant_rule_mean_risk", exact_functional(
        constant_rule(0), FiniteDistribution.bernoulli(p), 4, 2, Functional.MEAN).value == p
    rng = np.random.default_rng(0)
    samples = [SampleTuple.from_labels(rng.integers(0, 2, size=5).tolist()) for _ in range(5)]
    yield "majority_permutation_invariant", all(
        majority.majority_rule(5).is_permutation_invariant(s) for s in samples
    )
    rule = label_count_rule(random_label_count_table(4, np.random.default_rng(2)))
    base = exact_moments(rule, THREE_POINTS, 4, 2).model_dump(exclude={"instance"})
    yield "support_order_independent", all(
        exact_moments(rule, THREE_POINTS.reordered(order), 4, 2).model_dump(exclude={"instance"}) == base
        for order in ((1, 2, 0), (2, 0, 1), (2, 1, 0))
    )
    agree = True
    for functional in Functional:
        exact = exact_functional(majority.majority_rule(6), THIRD, 6, 3, functional)
        est = mc_functional(majority.majority_rule(6), THIRD, 6, 3, functional, 4000, Defaults.SEED)
        if not est.within(exact, 4):
            logger.warning("%s: mc %.6g vs exact %.6g", functional.value, est.value, float(exact))
            agree = False
    yield "mc_matches_exact", agree
    est = mc_functional(constant_rule(0), THIRD, 4, 2, Functional.MEAN, 50, Defaults.SEED)
    yield "constant_functional_zero_error", est.std_error == 0 and est.within(Fraction(1, 3), 4)


# --- 2. decomposition ---

def _instances():
    for n in (2, 4, 6, 8):
        yield majority.majority_rule(n), HALF, n
    for n in (2, 4):
        rule, dist = anticorr_fixture(n)
        yield rule, dist, n


def _decomposition():
    residual_zero = True
    bounds_hold = True
    for rule, dist, n in _instances():
        for k in _divisors(n):
            report = decompose(rule, dist, n, k)
            residual_zero &= report.residual.value == 0
            prof = stability_estimates(rule, dist, n, n // k)
            failed = [
                c.name for c in bound_suite(report, prof)
                if not (c.holds or abs(float(c.slack)) < 1e-12)
            ]
            if failed:
                logger.warning("%s n=%d k=%d: %s failed", report.instance, n, k, ", ".join(failed))
            bounds_hold &= not failed
    yield "residual_exactly_zero", residual_zero
    yield "bound_suite_holds", bounds_hold
    report = decompose(*anticorr_fixture(2), 2, 2)
    yield "anticorr_n2", report.mse.value == 0 and report.sls.value == Fraction(1, 8)


# --- 3. majority ---

def _majority():
    grid = [(n, m) for n in range(2, 17) for m in majority.fold_sizes(n)]
    yield "brute_force_equals_exact", all(
        majority.cov_exact(n, m).value == majority.cov_brute_force(n, m).value for n, m in grid
    )
    yield "conditional_equals_exact", all(
        majority.cov_exact(n, m).value == majority.cov_conditional(n, m).value for n, m in grid
    )
    yield "m1_closed_form", all(
        majority.cov_exact(n, 1).value == majority.cov_m1_closed(n).value for n in range(2, 201)
    )
    yield "half_closed_form", all(
        majority.cov_exact(n, n // 2).value == majority.cov_half_closed(n).value for n in range(2, 201, 2)
    )
    yield "minimizer_n300", majority.minimize_cov(300)[0] == 100
    yield "sublinear_within_5pct", all(
        abs(majority.cov_approx(3000, m, "sublinear") - float(majority.cov_exact(3000, m)))
        <= 0.05 * float(majority.cov_exact(3000, m))
        for m in (30, 100, 300, 1000)
    )
    est = majority.mse_majority_mc(12, 4, Fraction(1, 2), 20000, Defaults.SEED)
    yield "mc_matches_closed_form", est.within(majority.mse_majority(12, 4), 4)
    yield "mse_matches_engine", all(
        majority.mse_majority(n, n // k).value
        == exact_functional(majority.majority_rule(n), HALF, n, k, Functional.MSE).value
        for n in range(2, 9) for k in _divisors(n)
    )


# --- 4. linfield ---

def _linfield():
    dims = [(n1, n2) for n1 in range(9) for n2 in range(9)]
    yield "rank_formulas_agree", all(
        linfield.rank_prob(n1, n2, r, q).value == linfield.rank_prob(n1, n2, r, q, "sum").value
        for q in (2, 3, 5) for n1, n2 in dims for r in range(min(n1, n2) + 1)
    )
    yield "rank_law_sums_to_one", all(
        sum(linfield.rank_distribution(n1, n2, q).probs.values()) == 1 for q in (2, 3) for n1, n2 in dims
    )
    yield "rank_222", linfield.rank_prob(2, 2, 2, 2).value == Fraction(3, 8)
    yield "expected_loss_112", linfield.expected_loss_exact(1, 1, 2)[0].value == Fraction(1, 8)
    rng = np.random.default_rng(1)
    risks = {
        linfield.linear_risk_exhaustive(rng.integers(0, 3, 3), rng.integers(0, 3, 3), 3)
        for _ in range(20)
    }
    yield "linear_risk_dichotomy", risks <= {Fraction(0), Fraction(2, 3)}
    yield "rank_asymptotics", all(
        linfield.rank_asymptotics_check(n1, n2, j, 3).holds
        for n1, n2 in ((5, 3), (4, 4), (3, 6)) for j in (0, 1, 2)
    )
    yield "fold_noise_envelope", all(
        linfield.fold_noise_exact(n, d, q, m)[1].holds
        for n, d, q, m in ((4, 2, 3, 1), (6, 3, 2, 2), (5, 5, 3, 1))
    )
    trials = 20000
    frequencies_ok = True
    for q in (2, 3, 5):
        counts = linfield.rank_frequencies(4, 4, q, trials, Defaults.SEED)
        for r, p in linfield.rank_distribution(4, 4, q).probs.items():
            p = float(p)
            frequencies_ok &= abs(counts[r] - trials * p) <= 4 * np.sqrt(trials * p * (1 - p)) + 1
    yield "rank_frequencies", frequencies_ok
    X = FqMatrix.of([[1, 2, 0], [0, 0, 1]], 3)
    coset, _ = linfield.solve_uniform(X, [1, 2], seed=0)
    draws = {tuple(int(v) for v in b): 0 for b in coset.elements()}
    for seed in range(900):
        draws[linfield.solve_uniform(X, [1, 2], seed=seed)[1].coefficients] += 1
    yield "coset_uniform", chisquare(list(draws.values())).pvalue > 1e-3
    try:
        linfield.linear_mse_bound(10, 3, 4, 3)
        rejected = False
    except InvalidFoldSize:
        rejected = True
    yield "bound_needs_divisor", rejected


# --- 5. squarewave ---

def _squarewave():
    grid = [(n, m) for n in range(2, 19) for m in range(1, n // 2 + 1) if n % m == 0]
    yield "factorized_equals_brute_force", all(
        squarewave.cov_exact_factorized(n, m).value == squarewave.cov_brute_force(n, m).value
        for n, m in grid
    )
    deltas = np.linspace(0, 1, 1000)
    gap = np.max(np.abs(squarewave.theta_eval(deltas, "lattice") - squarewave.theta_eval(deltas, "series")))
    yield "theta_lattice_series", bool(gap <= 1e-12)
    yield "theta_half_vanishes", abs(squarewave.theta_eval(0.5)) <= 1e-12
    c = squarewave.squarewave_constants()
    yield "constants", abs(c.c0 - 0.0424) <= 1e-4 and abs(c.c1 - 0.0212) <= 1e-4
    rows = [squarewave.squarewave_row(m, R, constants=c) for m in (64, 144) for R in (1, 2)]
    yield "cov_positive", all(row["cov_exact_float"] > 0 for row in rows)
    yield "scaled_cov_near_c0", all(
        abs(row["m"] * row["cov_exact_float"] - c.c0) <= c.delta(row["R"]) + row["m"] ** -0.5 for row in rows
    )
    yield "epsilon_floor_exact", all(
        squarewave.epsilon_floor(u, m) == squarewave.epsilon_floor_reference(u, m)
        for m in range(1, 21) for u in range(200)
    )


SUITES = {
    "core": _core,
    "decomposition": _decomposition,
    "majority": _majority,
    "linfield": _linfield,
    "squarewave": _squarewave,
}


def verify(suite="all"):
    """Run one suite or all of them; returns the report dict."""
    if suite != "all" and suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose all or one of {', '.join(SUITES)}")
    names = list(SUITES) if suite == "all" else [suite]
    results = {}
    for name in names:
        checks = []
        try:
            for check, passed in SUITES[name]():
                checks.append({"check": check, "passed": bool(passed)})
        except CVMSEError as exc:
            logger.error("suite %s stopped: %s", name, exc)
            checks.append({"check": "completed", "passed": False, "error": str(exc)})
        logger.info("%s: %d/%d passed", name, sum(c["passed"] for c in checks), len(checks))
        results[name] = checks
    return {
        "version": __version__,
        "suites": results,
        "passed": all(c["passed"] for checks in results.values() for c in checks),
    }


def dumps(report):
    return orjson.dumps(report, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)
