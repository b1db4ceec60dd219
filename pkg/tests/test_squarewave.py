from fractions import Fraction

import numpy as np
import pytest

from cvmse.core.errors import BudgetExceeded, InvalidFoldSize, OutOfRange, RTooSmall
from cvmse.engine.exact import exact_functional
from cvmse.engine.functionals import Functional
from cvmse.squarewave import (
    bound_threshold_scan,
    cov_brute_force,
    cov_exact_factorized,
    epsilon_floor,
    epsilon_floor_reference,
    f_exact,
    predicted_cov,
    square_wave_rule,
    squarewave_constants,
    squarewave_row,
    theta_eval,
)

SMALL = [(n, m) for n in range(2, 19) for m in range(1, n // 2 + 1) if n % m == 0]


class TestRule:
    def test_epsilon_matches_high_precision(self):
        for m in range(1, 21):
            for u in range(0, 201):
                assert epsilon_floor(u, m) == epsilon_floor_reference(u, m)

    def test_epsilon_on_perfect_squares(self):
        # u = sqrt(m) t exactly starts block t
        assert epsilon_floor(3, 9) == -1
        assert epsilon_floor(2, 9) == 1
        assert epsilon_floor(6, 9) == 1

    def test_rule_against_engine(self, half):
        for n, m in [(4, 2), (6, 2), (6, 3)]:
            engine = exact_functional(square_wave_rule(m), half, n, n // m, Functional.FOLD_COV)
            assert engine.value == cov_exact_factorized(n, m).value

    def test_bad_arguments(self):
        with pytest.raises(OutOfRange):
            epsilon_floor(-1, 2)
        with pytest.raises(OutOfRange):
            square_wave_rule(0)
        with pytest.raises(OutOfRange):
            f_exact(-1, 2)


class TestCovariance:
    def test_small_values(self):
        assert cov_exact_factorized(4, 2).value == Fraction(1, 16)
        assert cov_exact_factorized(4, 1).value == Fraction(1, 4)
        assert f_exact(0, 2).value == Fraction(-1, 4)

    @pytest.mark.parametrize("n,m", SMALL)
    def test_factorized_matches_brute_force(self, n, m):
        assert cov_exact_factorized(n, m).value == cov_brute_force(n, m).value

    def test_guards(self):
        with pytest.raises(InvalidFoldSize):
            cov_exact_factorized(6, 4)
        with pytest.raises(InvalidFoldSize):
            cov_brute_force(9, 2)
        with pytest.raises(BudgetExceeded):
            cov_brute_force(20, 2)


class TestTheta:
    def test_lattice_and_series_agree(self):
        grid = np.linspace(0, 1, 41)
        assert np.max(np.abs(theta_eval(grid, "lattice") - theta_eval(grid, "series"))) <= 1e-12

    def test_reference_values(self):
        assert theta_eval(0.5) == pytest.approx(0, abs=1e-12)
        assert theta_eval(0.0) == pytest.approx(0.7300003, abs=1e-6)
        assert theta_eval(0.0, "lattice") == pytest.approx(0.7300003, abs=1e-6)

    def test_bad_arguments(self):
        with pytest.raises(OutOfRange):
            theta_eval(0.0, J=2)
        with pytest.raises(ValueError):
            theta_eval(0.0, method="other")

    def test_constants(self):
        constants = squarewave_constants()
        assert constants.C_alpha == pytest.approx(1.16971, abs=1e-5)
        assert constants.c0 == pytest.approx(0.0424, abs=1e-4)
        assert constants.c1 == pytest.approx(0.0212, abs=1e-4)
        assert constants.tail_bound < 1e-10
        assert constants.delta(2) < constants.delta(1)


class TestPrediction:
    @pytest.mark.parametrize("m", [64, 144, 256])
    @pytest.mark.parametrize("R", [1, 2])
    def test_scaled_covariance(self, m, R):
        constants = squarewave_constants()
        row = squarewave_row(m, R, constants=constants)
        assert row["n"] == m * (R + 2)
        assert row["cov_exact_float"] > 0
        assert abs(m * row["cov_exact_float"] - constants.c0) <= constants.delta(R) + m ** -0.5

    def test_needs_ratio_at_least_one(self):
        with pytest.raises(RTooSmall):
            predicted_cov(16, 0)

    def test_threshold_scan(self):
        threshold, rows = bound_threshold_scan(2, [36, 16, 64])
        assert [row["m"] for row in rows] == [16, 36, 64]
        if threshold is not None:
            assert all(row["within_bound"] for row in rows if row["m"] >= threshold)
