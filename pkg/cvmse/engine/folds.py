"""
Folds
Fold partitions, the k-fold CV estimate on a fixed sample, and population risk
"""

from fractions import Fraction

from cvmse.core.errors import DomainMismatch, LengthMismatch
from cvmse.models.results import ExactValue
from cvmse.models.sample import FoldScheme


def partition_folds(n, k):
    """Contiguous blocks range(i*m, (i+1)*m) for i < k."""
    return FoldScheme.contiguous(n, k)


def hypothesis_risk(hypothesis, dist):
    closed = hypothesis.risk_closed(dist)
    if closed is not None:
        return closed
    return dist.support_risk(hypothesis)


def population_risk(mix, dist):
    """Mixture-weighted 0-1 risk."""
    for h, _ in mix.atoms:
        if h.label_domain != dist.label_domain:
            raise DomainMismatch(
                f"{h.name} predicts in Z_{h.label_domain}, "
                f"distribution labels live in Z_{dist.label_domain}"
            )
    return ExactValue(value=sum((p * hypothesis_risk(h, dist) for h, p in mix.atoms), Fraction(0)))


def hold_out_loss(mix, points):
    """Mixture-expected average 0-1 loss on the given points."""
    total = Fraction(0)
    for h, p in mix.atoms:
        misses = sum(1 for z in points if h.predict(z.x) != z.y)
        total += p * Fraction(misses, len(points))
    return total


def cv_estimate(rule, sample, scheme):
    if len(sample) != scheme.n:
        raise LengthMismatch(f"sample has {len(sample)} points, scheme expects {scheme.n}")
    total = Fraction(0)
    for i in range(scheme.k):
        mix = rule.train(sample.subset(scheme.training(i)))
        total += hold_out_loss(mix, [sample[j] for j in scheme.hold_out(i)])
    return ExactValue(value=total / scheme.k)
