import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvmse.core.errors import InputMismatch, InvalidFoldSize, NotDivisible
from cvmse.decomposition import anticorr_fixture, bound_suite, constant_fixture, decompose, stability_estimates
from cvmse.engine.rules import label_count_rule, random_label_count_table
from cvmse.majority import majority_rule
from cvmse.models.sample import FiniteDistribution


def divisors(n):
    return [k for k in range(2, n + 1) if n % k == 0]


class TestIdentity:
    """The five terms reassemble the MSE with zero residual"""

    @pytest.mark.parametrize("n", [2, 4, 6, 8])
    def test_majority(self, half, n):
        for k in divisors(n):
            report = decompose(majority_rule(n), half, n, k)
            assert report.residual.value == 0

    @pytest.mark.parametrize("n", [2, 4, 6, 8])
    def test_anticorr(self, n):
        rule, dist = anticorr_fixture(n)
        for k in divisors(n):
            assert decompose(rule, dist, n, k).residual.value == 0

    @settings(max_examples=25, deadline=None)
    @given(
        seed=st.integers(0, 2 ** 32 - 1),
        n=st.sampled_from([2, 3, 4, 6]),
        p=st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(2, 3)]),
    )
    def test_random_label_count_rules(self, seed, n, p):
        rule = label_count_rule(random_label_count_table(n, np.random.default_rng(seed)))
        dist = FiniteDistribution.bernoulli(p)
        for k in divisors(n):
            assert decompose(rule, dist, n, k).residual.value == 0


class TestFixtures:
    def test_anticorr_two_points(self):
        rule, dist = anticorr_fixture(2)
        report = decompose(rule, dist, 2, 2)
        assert report.mse.value == 0
        assert report.sls.value == Fraction(1, 8)

    def test_anticorr_four_points(self):
        rule, dist = anticorr_fixture(4)
        assert decompose(rule, dist, 4, 4).sls.value == Fraction(1, 16)

    def test_anticorr_needs_even_n(self):
        with pytest.raises(InvalidFoldSize):
            anticorr_fixture(3)

    def test_constant_fixture(self):
        rule, dist = constant_fixture(Fraction(1, 3))
        report = decompose(rule, dist, 6, 3)
        assert report.mse.value == Fraction(1, 27)
        assert report.sls.value == 0
        assert report.inter_fold_cov.value == 0
        assert report.per_fold_noise.value / 6 == report.mse.value


class TestStability:
    def test_needs_divisor(self, half):
        with pytest.raises(NotDivisible):
            stability_estimates(majority_rule(5), half, 5, 2)

    def test_needs_proper_block(self, half):
        with pytest.raises(InvalidFoldSize):
            stability_estimates(majority_rule(4), half, 4, 4)

    @pytest.mark.parametrize("n,m", [(4, 1), (4, 2), (6, 2)])
    def test_orderings(self, third, n, m):
        prof = stability_estimates(majority_rule(n), third, n, m)
        # |L - L'| <= P(h != h') and E[X^2] >= E[X]^2
        assert prof.loss_stability.value <= prof.hypothesis_stability.value
        assert prof.risk_gap_sq.value >= prof.loss_stability.value ** 2
        assert prof.bernoulli_bound.value <= Fraction(1, 4)

    def test_mc_matches_exact(self, third):
        exact = stability_estimates(majority_rule(4), third, 4, 2)
        est = stability_estimates(majority_rule(4), third, 4, 2, mode="mc", trials=4000, seed=9)
        for name in ("hypothesis_stability", "mean_risk_train", "risk_var_n"):
            target, got = getattr(exact, name), getattr(est, name)
            assert abs(got.value - float(target)) <= 4 * got.std_error + 1e-3


class TestBoundSuite:
    def test_names_and_order(self, half):
        report = decompose(majority_rule(4), half, 4, 2)
        prof = stability_estimates(majority_rule(4), half, 4, 2)
        names = [check.name for check in bound_suite(report, prof)]
        assert names == [
            "correction_terms", "fold_cov_lower", "fold_cov_upper", "noise_bernoulli",
            "bernoulli_quarter", "sls_lower", "sls_upper", "mse_lower", "fold_cov_exchangeable_floor",
        ]

    def test_mismatch(self, half):
        report = decompose(majority_rule(4), half, 4, 2)
        prof = stability_estimates(majority_rule(4), half, 4, 1)
        with pytest.raises(InputMismatch):
            bound_suite(report, prof)

    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 2 ** 32 - 1),
        n=st.sampled_from([2, 3, 4, 6, 8]),
        p=st.sampled_from([Fraction(1, 5), Fraction(1, 2), Fraction(3, 4)]),
    )
    def test_random_instances(self, seed, n, p):
        rule = label_count_rule(random_label_count_table(n, np.random.default_rng(seed)))
        dist = FiniteDistribution.bernoulli(p)
        for k in divisors(n):
            m = n // k
            report = decompose(rule, dist, n, k)
            prof = stability_estimates(rule, dist, n, m)
            for check in bound_suite(report, prof):
                # float square roots can land a tight bound a rounding step off
                assert check.holds or abs(float(check.slack)) < 1e-12, check.as_row()

    @pytest.mark.parametrize("n,k,ps", [
        (6, 3, [Fraction(1, 5), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(4, 5)]),
        (8, 4, [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]),
    ])
    def test_fold_cov_lower_over_deterministic_rules(self, n, k, ps):
        size = n - n // k
        for choice in itertools.product((0, 1), repeat=size + 1):
            rule = label_count_rule({(size, y): c for y, c in enumerate(choice)})
            for p in ps:
                dist = FiniteDistribution.bernoulli(p)
                report = decompose(rule, dist, n, k)
                prof = stability_estimates(rule, dist, n, n // k)
                lower = bound_suite(report, prof)[1]
                assert lower.name == "fold_cov_lower"
                assert lower.holds, (choice, p)
                assert report.inter_fold_cov.value >= Fraction(-1, 4 * size)

    def test_mc_report(self, half):
        report = decompose(majority_rule(4), half, 4, 2, mode="mc", trials=3000, seed=4)
        exact = decompose(majority_rule(4), half, 4, 2)
        assert abs(report.mse.value - float(exact.mse)) <= 4 * report.mse.std_error + 1e-3
        assert abs(report.residual.value) <= 4 * report.residual.std_error + 1e-3
