from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
import pytest

from cvmse.core.errors import OutOfRange
from cvmse.engine.exact import ModelCache, exact_functional
from cvmse.engine.functionals import Functional
from cvmse.engine.montecarlo import check_seed, mc_functional, run_chunked, simulate_trials, standard_error
from cvmse.engine.rules import constant_rule, label_count_rule
from cvmse.majority import cov_exact, majority_rule
from cvmse.models.results import EstimateWithError


class TestSeeding:
    def test_seed_range(self):
        with pytest.raises(OutOfRange):
            check_seed(-1, 10)
        with pytest.raises(OutOfRange):
            check_seed(2 ** 64, 10)

    def test_needs_two_trials(self):
        with pytest.raises(OutOfRange):
            check_seed(0, 1)

    def test_chunks_keep_order(self):
        out = run_chunked(lambda a, b: np.arange(a, b), 23, threads=4, chunk=5)
        assert out.tolist() == list(range(23))


class TestDeterminism:
    def test_thread_count_does_not_change_trials(self, half):
        one = simulate_trials(majority_rule(4), half, 4, 2, 60, seed=7, threads=1, chunk=7)
        many = simulate_trials(majority_rule(4), half, 4, 2, 60, seed=7, threads=3, chunk=7)
        assert np.array_equal(one.fold_loss, many.fold_loss)
        assert np.array_equal(one.mse, many.mse)

    def test_chunk_size_does_not_change_trials(self, third):
        small = simulate_trials(majority_rule(6), third, 6, 3, 40, seed=2, chunk=3)
        large = simulate_trials(majority_rule(6), third, 6, 3, 40, seed=2, chunk=64)
        assert np.array_equal(small.fold_loss, large.fold_loss)

    def test_cache_counts_under_threads(self, third):
        cache = ModelCache(majority_rule(), third)
        a, b = third.points
        tuples = [[a, a, b], [b, a, a], [b, b, b], [a, b, b], [a, a, a]] * 80
        with ThreadPoolExecutor(max_workers=8) as executor:
            list(executor.map(cache.get, tuples))
        # four distinct label counts among the tuples
        assert cache.misses == 4
        assert cache.hits + cache.misses == len(tuples)

    def test_same_seed_same_estimate(self, third):
        a = mc_functional(majority_rule(6), third, 6, 3, Functional.MSE, 200, seed=3)
        b = mc_functional(majority_rule(6), third, 6, 3, Functional.MSE, 200, seed=3)
        assert a == b


class TestAgreement:
    @pytest.mark.parametrize("functional", [
        Functional.MSE, Functional.SLS, Functional.MEAN, Functional.FOLD_COV,
        Functional.CORR_HOLD, Functional.CORR_RISK, Functional.PER_FOLD_NOISE,
    ])
    def test_matches_exact(self, third, functional):
        exact = exact_functional(majority_rule(6), third, 6, 3, functional)
        est = mc_functional(majority_rule(6), third, 6, 3, functional, 4000, seed=11)
        assert abs(est.value - float(exact)) <= 4 * est.std_error + 1e-3

    def test_loss_variance_at_other_size(self, third):
        exact = exact_functional(majority_rule(), third, 4, 2, Functional.LOSS_VAR, n_prime=3)
        est = mc_functional(majority_rule(), third, 4, 2, Functional.LOSS_VAR, 4000, seed=5, n_prime=3)
        assert abs(est.value - float(exact)) <= 4 * est.std_error + 1e-3

    def test_majority_fold_covariance_at_scale(self, half):
        est = mc_functional(majority_rule(8), half, 8, 2, Functional.FOLD_COV, 100_000, seed=17)
        assert est.within(cov_exact(8, 4), 4)

    def test_constant_per_fold_noise(self, third):
        # deterministic on four-point training tuples, so every fold hypothesis is constant
        rule = label_count_rule({(4, y): int(y >= 2) for y in range(5)}, default=0)
        exact = exact_functional(rule, third, 6, 3, Functional.PER_FOLD_NOISE)
        est = mc_functional(rule, third, 6, 3, Functional.PER_FOLD_NOISE, 500, seed=4)
        assert est.std_error == 0
        assert est.within(exact, 4)


class TestEstimate:
    def test_within(self):
        est = EstimateWithError(value=0.5, std_error=0.01, trials=100, master_seed=0)
        assert est.within(Fraction(52, 100), 3)
        assert not est.within(0.6, 3)

    def test_zero_error_needs_exact_match(self):
        est = EstimateWithError(value=0.25, std_error=0.0, trials=10, master_seed=0)
        assert est.within(Fraction(1, 4), 1)
        assert not est.within(0.26, 100)

    def test_constant_rule_mean_has_zero_error(self, third):
        est = mc_functional(constant_rule(0), third, 4, 2, Functional.MEAN, 50, seed=1)
        assert est.std_error == 0
        assert est.within(Fraction(1, 3), 4)

    def test_rounding_spread_counts_as_constant(self):
        z = np.array([2 / 9, 0.22222222222222232, 2 / 9])
        assert standard_error(z, 3) == 0
        assert standard_error(np.array([0.0, 1.0, 0.0, 1.0]), 4) == pytest.approx(np.sqrt(1 / 3) / 2)
