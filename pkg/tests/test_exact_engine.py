from fractions import Fraction

import numpy as np
import pytest

from cvmse.core.errors import BudgetExceeded, DomainMismatch, InvalidFoldSize, OutOfRange
from cvmse.engine.exact import ModelCache, exact_functional, exact_moments
from cvmse.engine.functionals import Functional
from cvmse.engine.rules import constant_rule, label_count_rule, random_label_count_table
from cvmse.majority import majority_rule
from cvmse.models.field import UniformFieldDistribution
from cvmse.models.sample import FiniteDistribution, LabeledPoint

THREE_POINTS = FiniteDistribution(support=(
    (LabeledPoint(x="a", y=0), Fraction(1, 2)),
    (LabeledPoint(x="b", y=1), Fraction(1, 3)),
    (LabeledPoint(x="a", y=1), Fraction(1, 6)),
))


class TestConstantRule:
    """The constant rule has a deterministic risk; only the hold-out labels vary"""

    def test_mse_is_label_variance(self, third):
        value = exact_functional(constant_rule(0), third, 6, 3, Functional.MSE)
        assert value.value == Fraction(1, 3) * Fraction(2, 3) / 6

    def test_stability_terms_vanish(self, third):
        jm = exact_moments(constant_rule(0), third, 4, 2)
        assert jm.sls == 0
        assert jm.inter_fold_cov == 0
        assert jm.corr_hold == 0
        assert jm.corr_risk == 0
        assert jm.mean_risk_n == Fraction(1, 3)

    def test_mean(self, third):
        assert exact_functional(constant_rule(1), third, 4, 4, Functional.MEAN).value == Fraction(2, 3)


class TestMajorityMoments:
    def test_loss_variance_at_other_size(self, third):
        # trained on one point: h1 with probability 1/3, risks 2/3 and 1/3
        value = exact_functional(majority_rule(), third, 4, 2, Functional.LOSS_VAR, n_prime=1)
        assert value.value == Fraction(2, 81)

    def test_loss_variance_at_training_size(self, third):
        jm = exact_moments(majority_rule(), third, 4, 2)
        value = exact_functional(majority_rule(), third, 4, 2, Functional.LOSS_VAR, n_prime=2)
        assert value.value == jm.risk_var_train

    def test_pair_average(self, half):
        jm = exact_moments(majority_rule(6), half, 6, 3)
        pairs = [jm.pair_fold_cov(i, j) for i in range(3) for j in range(3) if i != j]
        assert jm.inter_fold_cov == sum(pairs, Fraction(0)) / len(pairs)

    def test_exchangeable_folds(self, half):
        jm = exact_moments(majority_rule(6), half, 6, 3)
        assert len(set(jm.fold_loss)) == 1
        assert jm.pair_fold_cov(0, 1) == jm.pair_fold_cov(2, 0)

    def test_stability_needs_flag(self, half):
        jm = exact_moments(majority_rule(4), half, 4, 2)
        with pytest.raises(OutOfRange):
            jm.hypothesis_stability


class TestGuards:
    def test_budget(self, half):
        with pytest.raises(BudgetExceeded):
            exact_functional(majority_rule(10), half, 10, 2, Functional.MSE, budget=100)

    def test_needs_finite_support(self):
        with pytest.raises(DomainMismatch):
            exact_moments(constant_rule(0), UniformFieldDistribution(d=2, q=2), 4, 2)

    def test_single_fold(self, half):
        with pytest.raises(InvalidFoldSize):
            exact_moments(majority_rule(4), half, 4, 1)


class TestModelCache:
    def test_symmetric_rules_share_models(self, half):
        cache = ModelCache(majority_rule(), half)
        a, b = half.points
        first = cache.get([a, b, b])
        second = cache.get([b, a, b])
        assert first is second
        assert (cache.hits, cache.misses) == (1, 1)

    def test_point_mass(self):
        dist = FiniteDistribution.bernoulli(1)
        value = exact_functional(majority_rule(4), dist, 4, 2, Functional.MSE)
        assert value.value == 0


class TestSupportOrder:
    """Exact results depend on the law, not on how its support is listed"""

    @pytest.mark.parametrize("order", [(2, 0, 1), (1, 2, 0), (2, 1, 0)])
    @pytest.mark.parametrize("functional", list(Functional))
    def test_majority(self, order, functional):
        base = exact_functional(majority_rule(4), THREE_POINTS, 4, 2, functional)
        moved = exact_functional(majority_rule(4), THREE_POINTS.reordered(order), 4, 2, functional)
        assert base.value == moved.value

    def test_label_count_rule(self):
        rule = label_count_rule(random_label_count_table(6, np.random.default_rng(3)))
        base = exact_moments(rule, THREE_POINTS, 6, 3, stability=True)
        moved = exact_moments(rule, THREE_POINTS.reordered((1, 2, 0)), 6, 3, stability=True)
        assert base.model_dump(exclude={"instance"}) == moved.model_dump(exclude={"instance"})

    def test_reordered_keeps_masses(self):
        moved = THREE_POINTS.reordered((2, 0, 1))
        assert moved.masses == (Fraction(1, 6), Fraction(1, 2), Fraction(1, 3))
        assert set(moved.points) == set(THREE_POINTS.points)
