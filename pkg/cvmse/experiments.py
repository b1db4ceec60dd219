"""
Experiments
Named experiment runners and the run() dispatcher
"""

import logging
from fractions import Fraction
from pathlib import Path

import numpy as np

from cvmse import linfield, majority, squarewave
from cvmse.artifacts import write_csv, write_svg
from cvmse.core.errors import UsageError
from cvmse.decomposition import anticorr_fixture, bound_suite, constant_fixture, decompose, stability_estimates
from cvmse.models.experiment import ExperimentConfig
from cvmse.models.sample import FiniteDistribution

logger = logging.getLogger(__name__)


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot read {text!r} as a probability") from exc


def _probabilities(config):
    return [_fraction(p) for p in config.p] or [Fraction(1, 2)]


# --- 1. Majority ---

def majority_table(config):
    rows = []
    for n in config.n:
        ms = config.m or majority.fold_sizes(n)
        for m in ms:
            row = majority.majority_row(n, m)
            rows.append({
                "n": row.n, "m": row.m, "k": row.k,
                "cov_exact": row.cov_exact,
                "cov_conditional": row.cov_conditional,
                "forms_agree": row.forms_agree,
                "cov_approx": row.cov_approx,
                "cov_approx_form": row.approx_form,
                "mse": row.mse,
            })
    return rows, dict(x="m", y="cov_exact_float", group="n", logy=True)


def majority_minimizer(config):
    rows = []
    for n in config.n:
        best_m, best_k, table = majority.minimize_cov(n)
        logger.info("n=%d: covariance minimized at m=%d (k=%d)", n, best_m, best_k)
        for row in table:
            rows.append({
                "n": row.n, "m": row.m, "k": row.k,
                "cov_exact": row.cov_exact, "mse": row.mse,
                "argmin": row.m == best_m,
            })
    return rows, dict(x="k", y="cov_exact_float", group="n", logy=True)


def minimax_sweep(config):
    rows = []
    for n in config.n:
        ks = [k for k in config.k if k >= 2 and n % k == 0]
        if not ks:
            raise UsageError(f"no admissible k divides n={n}")
        result = majority.minimax_sweep(
            n, ks, _probabilities(config), trials=config.trials, seed=config.seed, budget=config.budget,
        )
        for row in result.rows:
            rows.append({
                **row,
                "minimax_proxy": result.minimax_proxy,
                "argmin_k": result.argmin_k,
                "argmin_k_cov": result.argmin_k_cov,
            })
    return rows, dict(x="k", y="mse_scaled", group="n")


# --- 2. Linear functions over F_q ---

def linear_mse(config):
    rows = []
    ks = config.k or [2]
    for q in config.q:
        for d in config.d:
            for n in config.n:
                for k in ks:
                    if k < 2 or n % k:
                        logger.info("skipping n=%d, k=%d: k must divide n", n, k)
                        continue
                    rows.append(linfield.linear_row(n, k, d, q, config.trials, config.seed))
    return rows, dict(x="d", y="mse_mc", group="n")


def rank_table(config):
    rows = []
    for q in config.q:
        for n1 in config.n:
            for n2 in config.d:
                counts = linfield.rank_frequencies(n1, n2, q, config.trials, config.seed)
                for r, count in enumerate(counts):
                    prob = linfield.rank_prob(n1, n2, r, q)
                    expected = float(prob) * config.trials
                    spread = np.sqrt(max(expected * (1 - float(prob)), 1e-300))
                    rows.append({
                        "q": q, "n1": n1, "n2": n2, "r": r,
                        "prob": prob,
                        "formulas_agree": prob.value == linfield.rank_prob(n1, n2, r, q, "sum").value,
                        "count": int(count),
                        "expected": expected,
                        "z": (int(count) - expected) / spread,
                    })
    return rows, dict(x="r", y="prob_float", group="n1")


# --- 3. Square wave ---

def squarewave_cov(config):
    rows = []
    constants = squarewave.squarewave_constants()
    for R in config.ratio or [1, 2]:
        for m in config.m:
            rows.append(squarewave.squarewave_row(m, R, constants=constants))
    return rows, dict(x="m", y="cov_exact_float", group="R", logy=True)


# --- 4. Decomposition ---

def _instances(config, n):
    fixture = config.fixture or "majority"
    if fixture == "anticorr":
        yield anticorr_fixture(n)
        return
    for p in _probabilities(config):
        if fixture == "constant":
            yield constant_fixture(p)
        else:
            yield majority.majority_rule(n), FiniteDistribution.bernoulli(p)


def _mode_for(config, rule, dist, n):
    if config.mode:
        return config.mode
    return "exact" if dist.size ** n * rule.max_mixture_size <= config.budget else "mc"


def decompose_run(config):
    rows, bounds = [], []
    for n in config.n:
        for k in config.k:
            if k < 2 or n % k:
                logger.info("skipping n=%d, k=%d: k must divide n", n, k)
                continue
            for rule, dist in _instances(config, n):
                mode = _mode_for(config, rule, dist, n)
                kwargs = dict(mode=mode, trials=config.trials, seed=config.seed,
                              budget=config.budget, threads=config.threads)
                report = decompose(rule, dist, n, k, **kwargs)
                prof = stability_estimates(rule, dist, n, n // k, **kwargs)
                rows.append({"n": n, "k": k, "m": report.m, "instance": report.instance,
                             "mode": mode, **report.as_row()})
                for check in bound_suite(report, prof):
                    bounds.append({"n": n, "k": k, "instance": report.instance, **check.as_row()})
    return rows, dict(x="k", y="mse", group="n", extra={"bounds": bounds})


RUNNERS = {
    "majority-table": majority_table,
    "majority-minimizer": majority_minimizer,
    "linear-mse": linear_mse,
    "rank-table": rank_table,
    "squarewave-cov": squarewave_cov,
    "decompose": decompose_run,
    "minimax-sweep": minimax_sweep,
}


def run(subcommand, config):
    """Run one experiment and write its artifacts; returns the written paths."""
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig(subcommand=subcommand, **config)
    if config.subcommand != subcommand:
        raise UsageError(f"config is for {config.subcommand}, not {subcommand}")
    rows, plot = RUNNERS[subcommand](config)
    extra = plot.pop("extra", {})
    out = Path(config.out)
    written = []
    if config.wants_csv:
        written.append(write_csv(out.with_suffix(".csv"), rows, config.seed, subcommand))
        for suffix, table in extra.items():
            written.append(write_csv(out.with_name(f"{out.name}_{suffix}.csv"), table, config.seed, subcommand))
    if config.wants_svg and rows:
        written.append(write_svg(out.with_suffix(".svg"), rows, title=subcommand, **plot))
    return written
