from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from cvmse.core.errors import DomainMismatch, LengthMismatch, NotDivisible, OutOfRange
from cvmse.engine.folds import cv_estimate, partition_folds, population_risk
from cvmse.engine.rules import constant_rule, label_count_rule, random_label_count_table
from cvmse.majority import majority_rule
from cvmse.models.hypothesis import HypothesisMixture, IntervalHypothesis, constant_hypothesis
from cvmse.models.sample import FiniteDistribution, FoldScheme, LabeledPoint, SampleTuple


class TestPartition:
    def test_contiguous_blocks(self):
        scheme = partition_folds(6, 3)
        assert scheme.m == 2
        assert scheme.blocks == ((0, 1), (2, 3), (4, 5))
        assert scheme.training(1) == (0, 1, 4, 5)
        assert scheme.hold_out(2) == (4, 5)

    def test_not_divisible(self):
        with pytest.raises(NotDivisible):
            partition_folds(5, 2)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            partition_folds(0, 1)


class TestCVEstimate:
    def test_constant_rule(self):
        sample = SampleTuple.from_labels([1, 0, 1, 1])
        value = cv_estimate(constant_rule(0), sample, partition_folds(4, 2))
        assert value.value == Fraction(3, 4)

    def test_length_mismatch(self):
        sample = SampleTuple.from_labels([1, 0, 1])
        with pytest.raises(LengthMismatch):
            cv_estimate(constant_rule(0), sample, partition_folds(4, 2))

    def test_majority_leave_one_out(self):
        # training ties go to h0, so every held-out label is missed
        sample = SampleTuple.from_labels([1, 1, 0])
        value = cv_estimate(majority_rule(3), sample, partition_folds(3, 3))
        assert value.value == 1

    @settings(max_examples=30, deadline=None)
    @given(
        labels=st.lists(st.integers(0, 1), min_size=6, max_size=6),
        order=st.permutations(range(3)),
        seed=st.integers(0, 2 ** 32 - 1),
    )
    def test_fold_relabeling(self, labels, order, seed):
        rule = label_count_rule(random_label_count_table(6, np.random.default_rng(seed)))
        sample = SampleTuple.from_labels(labels)
        scheme = partition_folds(6, 3)
        relabeled = FoldScheme(n=6, k=3, m=2, blocks=tuple(scheme.blocks[i] for i in order))
        assert cv_estimate(rule, sample, relabeled).value == cv_estimate(rule, sample, scheme).value


class TestDistributions:
    def test_bernoulli_drops_zero_mass(self):
        assert FiniteDistribution.bernoulli(0).size == 1
        assert FiniteDistribution.bernoulli(Fraction(1, 4)).masses == (Fraction(3, 4), Fraction(1, 4))

    def test_bernoulli_range(self):
        with pytest.raises(OutOfRange):
            FiniteDistribution.bernoulli(Fraction(3, 2))

    def test_masses_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            FiniteDistribution(support=(
                (LabeledPoint(x="x", y=0), Fraction(1, 2)),
                (LabeledPoint(x="x", y=1), Fraction(1, 4)),
            ))

    def test_points_must_be_distinct(self):
        z = LabeledPoint(x="x", y=0)
        with pytest.raises(ValidationError):
            FiniteDistribution(support=((z, Fraction(1, 2)), (z, Fraction(1, 2))))

    def test_draw_uses_support(self, third, rng):
        sample = third.draw(rng, 50)
        assert len(sample) == 50
        assert set(sample.labels) <= {0, 1}

    def test_population_risk(self, third):
        assert population_risk(HypothesisMixture.point(constant_hypothesis(0)), third).value == Fraction(1, 3)
        assert population_risk(HypothesisMixture.point(constant_hypothesis(1)), third).value == Fraction(2, 3)

    def test_label_domain_mismatch(self, half):
        mix = HypothesisMixture.point(constant_hypothesis(0, label_domain=3))
        with pytest.raises(DomainMismatch):
            population_risk(mix, half)


class TestHypotheses:
    def test_interval_risks(self, half):
        full = IntervalHypothesis(name="full", lo=Fraction(0), hi=Fraction(1))
        right = IntervalHypothesis(name="right", lo=Fraction(1, 2), hi=Fraction(1))
        empty = IntervalHypothesis(name="empty", lo=Fraction(0), hi=Fraction(0))
        assert right.risk_closed(half) == 0
        assert full.risk_closed(half) == Fraction(1, 2)
        assert empty.risk_closed(half) == Fraction(1, 2)
        assert full.disagreement_closed(empty, half) == 1
        assert right.disagreement_closed(right, half) == 0

    def test_interval_needs_numeric_feature(self):
        h = IntervalHypothesis(name="mid", lo=Fraction(1, 4), hi=Fraction(3, 4))
        assert h.predict(Fraction(1, 2)) == 1
        with pytest.raises(DomainMismatch):
            h.predict("x")

    def test_mixture_weights(self):
        with pytest.raises(ValidationError):
            HypothesisMixture(atoms=((constant_hypothesis(0), Fraction(1, 2)),))
        mix = HypothesisMixture.of(((constant_hypothesis(0), Fraction(1)), (constant_hypothesis(1), 0)))
        assert mix.size == 1

    def test_label_count_probability_range(self):
        with pytest.raises(OutOfRange):
            label_count_rule({(1, 0): 2})


class TestSymmetry:
    @settings(max_examples=30, deadline=None)
    @given(labels=st.lists(st.integers(0, 1), min_size=1, max_size=5), seed=st.integers(0, 2 ** 32 - 1))
    def test_label_count_rules_are_permutation_invariant(self, labels, seed):
        table = random_label_count_table(5, np.random.default_rng(seed))
        rule = label_count_rule(table)
        assert rule.is_permutation_invariant(SampleTuple.from_labels(labels))

    def test_majority_is_permutation_invariant(self):
        assert majority_rule(5).is_permutation_invariant(SampleTuple.from_labels([1, 0, 1, 1, 0]))
