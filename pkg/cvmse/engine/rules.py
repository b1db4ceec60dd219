"""
Rules
Sample-independent and label-count learning rules used as fixtures
"""

from fractions import Fraction

from cvmse.core.errors import OutOfRange
from cvmse.models.hypothesis import HypothesisMixture, LearningRule, constant_hypothesis


def constant_rule(label=0, label_domain=2):
    """Always outputs the constant hypothesis `label`."""
    mix = HypothesisMixture.point(constant_hypothesis(label, label_domain))
    return LearningRule(
        name=f"constant-{label}",
        train=lambda sample: mix,
        label_domain=label_domain,
    )


def label_count_rule(table, default=Fraction(1, 2), name="label-count"):
    """Randomized rule choosing h1 with probability table[(size, label_sum)].

    Any such rule is symmetric because it only sees label counts.
    """
    table = {key: Fraction(p) for key, p in table.items()}
    default = Fraction(default)
    for p in list(table.values()) + [default]:
        if not 0 <= p <= 1:
            raise OutOfRange(f"probability {p} outside [0, 1]")
    h0, h1 = constant_hypothesis(0), constant_hypothesis(1)

    def train(sample):
        p = table.get((len(sample), sample.label_sum), default)
        return HypothesisMixture.of(((h1, p), (h0, 1 - p)))

    return LearningRule(name=name, train=train, max_mixture_size=2)


def random_label_count_table(n, rng, denominator=4):
    """Random probabilities in {0, 1/den, ..., 1} for every (size, label_sum) up to n."""
    return {
        (size, y): Fraction(int(rng.integers(0, denominator + 1)), denominator)
        for size in range(1, n + 1)
        for y in range(size + 1)
    }
