"""
Linear Functions over F_q
Gaussian coefficients, rank laws, elimination, the randomized linear ERM and its CV error
"""

import itertools
import logging
from fractions import Fraction
from math import comb

import numpy as np

from cvmse.core.config import Defaults
from cvmse.core.errors import Inconsistent, InvalidFoldSize, NotDivisible, OutOfRange
from cvmse.engine.montecarlo import check_seed, standard_error, trial_draws
from cvmse.models.field import FieldSpec, FqMatrix, LinearHypothesis, RankDistribution, SolutionCoset
from cvmse.models.hypothesis import Hypothesis, HypothesisMixture, LearningRule
from cvmse.models.results import BoundCheck, EstimateWithError, ExactValue

logger = logging.getLogger(__name__)


# --- 1. Gaussian coefficients and rank laws ---

def gaussian_coefficient(n, k, q):
    """prod_{i<k} (q^(n-i) - 1) / (q^(k-i) - 1)."""
    if not 0 <= k <= n:
        raise OutOfRange(f"need 0 <= k <= n, got n={n}, k={k}")
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (k - i) - 1
    return ExactValue(value=num // den)


def _gauss(n, k, q):
    return gaussian_coefficient(n, k, q).value


def rank_prob(n1, n2, r, q, formula="product"):
    """P(rank = r) for a uniform n1 x n2 matrix over F_q."""
    if not 0 <= r <= min(n1, n2):
        raise OutOfRange(f"need 0 <= r <= min(n1, n2), got r={r}")
    Q = Fraction(q)
    if formula == "product":
        value = _gauss(n2, r, q) * Q ** (n1 * (r - n2))
        for s in range(r):
            value *= 1 - Q ** (s - n1)
    elif formula == "sum":
        value = _gauss(n2, r, q) * sum(
            (-1) ** (r - l) * _gauss(r, l, q) * Q ** (n1 * (l - n2) + comb(r - l, 2))
            for l in range(r + 1)
        )
    else:
        raise ValueError(f"formula must be 'product' or 'sum', got {formula!r}")
    return ExactValue(value=value)


def rank_distribution(n1, n2, q):
    FieldSpec(q=q)
    probs = {r: rank_prob(n1, n2, r, q).value for r in range(min(n1, n2) + 1)}
    return RankDistribution(q=q, n1=n1, n2=n2, probs=probs)


def rank_asymptotics_check(n1, n2, j, q, constant=Defaults.ENVELOPE_CONSTANT):
    """Rank deficiency j has probability at most C q^{-j(D + j)}, D = |n1 - n2|; j = 0 bounds 1 - P(full rank)."""
    if j < 0:
        raise OutOfRange(f"deficiency must be nonnegative, got {j}")
    m0, gap = min(n1, n2), abs(n1 - n2)
    if j == 0:
        lhs = 1 - rank_prob(n1, n2, m0, q).value
        rhs = constant * Fraction(1, q ** (gap + 1))
    else:
        lhs = rank_prob(n1, n2, m0 - j, q).value if j <= m0 else Fraction(0)
        rhs = constant * Fraction(1, q ** (j * (gap + j)))
    return BoundCheck(name=f"rank_deficiency_{j}", lhs=lhs, rhs=rhs)


# --- 2. Elimination ---

def batched_rref(mats, q):
    """Reduced row echelon forms of a stack of matrices over Z_q.

    Returns (reduced, rank, pivots) with pivots a boolean column mask.
    """
    A = np.array(mats, dtype=np.int64) % q
    single = A.ndim == 2
    if single:
        A = A[None]
    T, R, C = A.shape
    inv = FieldSpec(q=q).inverses()
    row = np.zeros(T, dtype=np.int64)
    pivots = np.zeros((T, C), dtype=bool)
    rows = np.arange(R)
    for c in range(C):
        mask = (A[:, :, c] != 0) & (rows[None, :] >= row[:, None])
        has = mask.any(axis=1)
        if not has.any():
            continue
        t = np.flatnonzero(has)
        r0 = row[t]
        p = mask[t].argmax(axis=1)
        top = A[t, r0].copy()
        A[t, r0] = A[t, p]
        A[t, p] = top
        A[t, r0] = (A[t, r0] * inv[A[t, r0, c]][:, None]) % q
        factors = A[t, :, c].copy()
        factors[np.arange(len(t)), r0] = 0
        A[t] = (A[t] - factors[:, :, None] * A[t, r0][:, None, :]) % q
        pivots[t, c] = True
        row[t] += 1
    if single:
        return A[0], int(row[0]), pivots[0]
    return A, row, pivots


def fq_rank(matrix, q=None):
    if isinstance(matrix, FqMatrix):
        matrix, q = matrix.entries, matrix.field.q
    return batched_rref(matrix, q)[1]


def rank_frequencies(n1, n2, q, trials, seed, chunk=None):
    """Empirical rank counts of uniform random n1 x n2 matrices, one generator per draw."""
    check_seed(seed, trials)
    chunk = chunk or Defaults.MC_CHUNK
    counts = np.zeros(min(n1, n2) + 1, dtype=np.int64)
    for start in range(0, trials, chunk):
        stop = min(start + chunk, trials)
        mats = trial_draws(seed, start, stop, lambda rng: rng.integers(0, q, size=(n1, n2)))
        _, ranks, _ = batched_rref(mats, q)
        counts += np.bincount(ranks, minlength=len(counts))
    return counts


def _nullspace_draw(reduced, pivots, free_values, q):
    """Uniform element of the nullspace from random values on the free columns."""
    a = np.where(pivots, 0, free_values)
    v = np.einsum("trc,tc->tr", reduced, a) % q
    t_idx, c_idx = np.nonzero(pivots)
    r_idx = (pivots.cumsum(axis=1) - 1)[t_idx, c_idx]
    a[t_idx, c_idx] = (-v[t_idx, r_idx]) % q
    return a


# --- 3. Solving and the linear rule ---

def solution_coset(X, y):
    """Particular solution and nullspace basis of X b = y."""
    q = X.field.q
    n, d = X.shape
    y = np.asarray(y, dtype=np.int64).reshape(n, 1) % q
    reduced, rank, pivots = batched_rref(np.hstack([X.entries, y]), q)
    if pivots[d]:
        raise Inconsistent("the labels are not a linear function of the features")
    pivot_cols = np.flatnonzero(pivots[:d])
    free_cols = np.flatnonzero(~pivots[:d])
    particular = np.zeros(d, dtype=np.int64)
    particular[pivot_cols] = reduced[:len(pivot_cols), d]
    basis = np.zeros((len(free_cols), d), dtype=np.int64)
    for b, f in enumerate(free_cols):
        basis[b, f] = 1
        basis[b, pivot_cols] = (-reduced[:len(pivot_cols), f]) % q
    return SolutionCoset(q=q, particular=particular, basis=basis)


def solve_uniform(X, y, seed):
    coset = solution_coset(X, y)
    draw = coset.sample(np.random.default_rng(seed))
    return coset, LinearHypothesis.of(draw, coset.q)


def _system(sample, d, q):
    X = sample.feature_matrix().reshape(len(sample), d)
    return FqMatrix(field=FieldSpec(q=q), entries=X % q), sample.label_vector()


def wrong_linear(q):
    """Stand-in for any linear hypothesis other than the ground truth."""
    return Hypothesis(name="lin-wrong", label_domain=q, closed_risk=lambda dist: 1 - Fraction(1, q))


def linear_rule(d, q, mode="coset", truth=None):
    """Randomized ERM over Lin_q(d): uniform over every consistent linear function.

    mode="coset" mixes over the explicit coset; mode="conditional" collapses it
    to the ground truth with probability q^{r-d} and a risk-(1 - 1/q) stand-in.
    """
    if d < 1:
        raise OutOfRange(f"dimension must be positive, got {d}")
    FieldSpec(q=q)
    truth = LinearHypothesis.of(truth or (0,) * d, q)

    def coset_of(sample):
        X, y = _system(sample, d, q)
        return solution_coset(X, y)

    def train_coset(sample):
        coset = coset_of(sample)
        weight = Fraction(1, coset.size)
        return HypothesisMixture(atoms=tuple(
            (LinearHypothesis.of(b, q), weight) for b in coset.elements()
        ))

    def train_conditional(sample):
        X, _ = _system(sample, d, q)
        correct = Fraction(q) ** (fq_rank(X) - d)
        return HypothesisMixture.of(((truth, correct), (wrong_linear(q), 1 - correct)))

    def sampler(sample, rng):
        return LinearHypothesis.of(coset_of(sample).sample(rng), q)

    if mode not in ("coset", "conditional"):
        raise ValueError(f"mode must be 'coset' or 'conditional', got {mode!r}")
    return LearningRule(
        name=f"linear-{mode}-F{q}^{d}",
        train=train_coset if mode == "coset" else train_conditional,
        label_domain=q,
        max_mixture_size=q ** d if mode == "coset" else 2,
        sampler=sampler,
    )


def linear_risk_exhaustive(a, f, q):
    """Fraction of F_q^d on which <a, x> and <f, x> differ."""
    a, f = np.asarray(a, dtype=np.int64), np.asarray(f, dtype=np.int64)
    X = np.array(list(itertools.product(range(q), repeat=len(a))), dtype=np.int64)
    differ = int(np.count_nonzero((X @ a) % q != (X @ f) % q))
    return Fraction(differ, q ** len(a))


# --- 4. Loss laws ---

def _wrong_mass(n_train, d, q):
    """S0 = P(the rule misses the ground truth) = sum_r (1 - q^{r-d}) R_q(n_train, d, r)."""
    ranks = rank_distribution(n_train, d, q)
    return ranks.expectation(lambda r: 1 - Fraction(q) ** (r - d))


def expected_loss_exact(n_train, d, q):
    """(L_bar, S0, Var L) for the rule trained on n_train points."""
    if n_train < 0:
        raise OutOfRange(f"training size must be nonnegative, got {n_train}")
    s0 = _wrong_mass(n_train, d, q)
    miss = 1 - Fraction(1, q)
    return (
        ExactValue(value=miss * s0),
        ExactValue(value=s0),
        ExactValue(value=miss ** 2 * s0 * (1 - s0)),
    )


def expected_loss_mc(n_train, d, q, trials, seed, chunk=None):
    """Risk of concrete coset draws, truth fixed to zero; trial t draws from (seed, t)."""
    check_seed(seed, trials)
    chunk = chunk or Defaults.MC_CHUNK
    risks = []
    for start in range(0, trials, chunk):
        X, free = trial_draws(
            seed, start, min(start + chunk, trials),
            lambda rng: (rng.integers(0, q, size=(n_train, d)), rng.integers(0, q, size=d)),
        )
        _, _, pivots = batched_rref(X, q) if n_train else (None, None, np.zeros(free.shape, dtype=bool))
        wrong = np.any(np.where(pivots, 0, free) != 0, axis=1)
        risks.append(wrong * (1 - 1 / q))
    z = np.concatenate(risks)
    return EstimateWithError(
        value=float(z.mean()), std_error=standard_error(z, trials),
        trials=trials, master_seed=seed,
    )


def fold_noise_exact(n_train, d, q, m, constant=Defaults.ENVELOPE_CONSTANT):
    """(1/m) sum_r R_q(n_train, d, r) L_r (1 - L_r), L_r = (1 - q^{r-d})(1 - 1/q), with its envelope."""
    if m < 1:
        raise InvalidFoldSize(f"fold size must be positive, got {m}")
    miss = 1 - Fraction(1, q)
    ranks = rank_distribution(n_train, d, q)

    def noise(r):
        L = (1 - Fraction(q) ** (r - d)) * miss
        return L * (1 - L)

    value = ranks.expectation(noise) / m
    exponent = abs(n_train - d) + (2 if n_train >= d else 0)
    check = BoundCheck(name="fold_noise_envelope", lhs=value, rhs=Fraction(constant, m * q ** exponent))
    return ExactValue(value=value), check


def linear_mse_bound(n, m, d, q):
    """Case and leading order of the CV MSE for the linear rule."""
    if m < 1 or m > n:
        raise InvalidFoldSize(f"need 1 <= m <= n, got m={m}, n={n}")
    if n % m:
        raise InvalidFoldSize(f"fold size {m} does not divide n={n}")
    if n < d:
        return 1, float(q) ** -(d - n)
    if n - m < d:
        return 2, 1.0
    return 3, float(q) ** -(n - m - d + 1)


def linear_cv_moments(n, m, d, q):
    """Exact E[Lhat_1], E[Lhat_1^2], E[L], E[L^2] and E[Lhat_1 L] for one fold."""
    if m < 1 or m > n:
        raise InvalidFoldSize(f"need 1 <= m <= n, got m={m}, n={n}")
    Q = Fraction(q)
    miss = 1 - 1 / Q
    s_train = _wrong_mass(n - m, d, q)
    s_full = _wrong_mass(n, d, q)
    fold_mean = miss * s_train

    # E[Lhat_1 q^{rank - d}]: with s = d - r' free directions, a hold-out miss
    # pins one pivot and leaves a uniform (m-1) x (s-1) remainder
    joint = Fraction(0)
    for r_train, p in rank_distribution(n - m, d, q).probs.items():
        s = d - r_train
        if s == 0:
            continue
        remainder = rank_distribution(m - 1, s - 1, q).expectation(lambda r: Q ** r)
        joint += p * Q ** -s * (1 - Q ** -s) * (q - 1) * remainder

    values = {
        "fold_loss": fold_mean,
        "fold_loss_sq": s_train * (miss / (Q * m) + miss ** 2),
        "risk": miss * s_full,
        "risk_sq": miss ** 2 * s_full,
        "fold_loss_risk": miss * (fold_mean - joint),
    }
    return {name: ExactValue(value=v) for name, v in values.items()}


# --- 5. Simulation ---

def simulate_linear_cv(n, k, d, q, trials, seed, chunk=None):
    """Fold losses of concrete coset draws and the full-model conditional MSE.

    Returns a dict of per-trial arrays: fold_loss (T, k), full_rank (T,),
    full_risk (T,) and mse (T,). Ground truth is the zero functional.
    Trial t draws from (seed, t) whatever the chunk size.
    """
    check_seed(seed, trials)
    if k < 2 or n % k:
        raise NotDivisible(f"k={k} must be at least 2 and divide n={n}")
    FieldSpec(q=q)
    m = n // k
    chunk = chunk or Defaults.MC_CHUNK
    parts = []
    for start in range(0, trials, chunk):
        size = min(chunk, trials - start)
        X, free = trial_draws(
            seed, start, start + size,
            lambda rng: (rng.integers(0, q, size=(n, d)), rng.integers(0, q, size=(k, d))),
        )
        fold_loss = np.empty((size, k))
        for i in range(k):
            held = X[:, i * m:(i + 1) * m]
            train = np.concatenate([X[:, :i * m], X[:, (i + 1) * m:]], axis=1)
            reduced, _, pivots = batched_rref(train, q)
            a = _nullspace_draw(reduced, pivots, free[:, i], q)
            hits = np.einsum("tmd,td->tm", held, a) % q
            fold_loss[:, i] = np.count_nonzero(hits, axis=1) / m
        _, full_rank, _ = batched_rref(X, q)
        correct = float(q) ** (full_rank - d)
        cv = fold_loss.mean(axis=1)
        wrong_risk = 1 - 1 / q
        mse = (1 - correct) * (cv - wrong_risk) ** 2 + correct * cv ** 2
        parts.append((fold_loss, full_rank, (1 - correct) * wrong_risk, mse))
    return {
        "fold_loss": np.concatenate([p[0] for p in parts]),
        "full_rank": np.concatenate([p[1] for p in parts]),
        "full_risk": np.concatenate([p[2] for p in parts]),
        "mse": np.concatenate([p[3] for p in parts]),
    }


def linear_mse_mc(n, k, d, q, trials, seed):
    sim = simulate_linear_cv(n, k, d, q, trials, seed)
    z = sim["mse"]
    return EstimateWithError(
        value=float(z.mean()), std_error=standard_error(z, trials),
        trials=trials, master_seed=seed,
    )


def linear_row(n, k, d, q, trials, seed):
    m = n // k
    case, bound = linear_mse_bound(n, m, d, q)
    est = linear_mse_mc(n, k, d, q, trials, seed)
    l_bar, _, loss_var = expected_loss_exact(n, d, q)
    return {
        "q": q, "d": d, "n": n, "m": m, "case": case, "bound": bound,
        "mse_mc": est.value, "std_error": est.std_error,
        "L_bar": l_bar.as_text(), "L_bar_float": float(l_bar),
        "loss_var": loss_var.as_text(), "loss_var_float": float(loss_var),
    }
