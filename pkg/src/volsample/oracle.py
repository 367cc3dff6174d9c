"""Exact brute-force expectations under volume sampling.

Every operation here enumerates all subsets at the requested size, weights
the per-subset quantity by its exact probability (a determinant ratio), and
accumulates with compensated summation.  The results are machine-precision
ground truth for the fast sampler and the closed-form expectation identities.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import SizeRangeError, TooManySubsetsError
from .linalg import ProblemMatrix, gram, pseudo_inverse
from .regression import RegressionProblem, solve_subset
from .sampler import (
    DEFAULT_SUBSET_CAP,
    enumerate_volume_distribution,
    removal_weights,
)

# Enumerating k-tuples of subsets stops at this many tuples by default.
DEFAULT_TUPLE_CAP = 10**5


@dataclass(frozen=True, eq=False)
class ExactExpectation:
    """An exactly enumerated expectation.

    ``support_complete`` is True iff every enumerated subset had positive
    probability; the equality forms of the second-moment identities require
    it, otherwise only the semidefinite inequality direction holds.
    """

    quantity: str
    value: "np.ndarray | float"
    support_complete: bool


class KahanSum:
    """Compensated accumulator for scalars or fixed-shape arrays."""

    def __init__(self, shape=()):
        self._total = np.zeros(shape)
        self._comp = np.zeros(shape)

    def add(self, term) -> None:
        y = np.asarray(term, dtype=float) - self._comp
        t = self._total + y
        self._comp = (t - self._total) - y
        self._total = t

    @property
    def value(self) -> np.ndarray:
        return self._total.copy()

    @property
    def scalar(self) -> float:
        return float(self._total)


def _positive_table(x: ProblemMatrix, size: int, cap: int):
    """(subset, probability) pairs with zero-probability subsets dropped."""
    table = enumerate_volume_distribution(x, size, cap)
    positive = [(sub, prob) for sub, prob in table if prob > 0.0]
    return positive, len(positive) == len(table)


def exact_pinv_expectation(
    x: ProblemMatrix, size: int, cap: int = DEFAULT_SUBSET_CAP
) -> ExactExpectation:
    """E over size-``size`` subsets of the padded pseudo-inverse (n-by-d)."""
    positive, complete = _positive_table(x, size, cap)
    acc = KahanSum((x.n, x.d))
    for sub, prob in positive:
        acc.add(prob * pseudo_inverse(x, sub))
    return ExactExpectation("pseudo-inverse", acc.value, complete)


def exact_gram_inverse_expectation(
    x: ProblemMatrix, size: int, cap: int = DEFAULT_SUBSET_CAP
) -> ExactExpectation:
    """E of (X_S X_S^T)^{-1}; equals (n-d+1)/(s-d+1) (X X^T)^{-1} under full
    support, and is dominated by it (positive semidefinite difference)
    otherwise."""
    positive, complete = _positive_table(x, size, cap)
    acc = KahanSum((x.d, x.d))
    for sub, prob in positive:
        acc.add(prob * gram(x, sub).inverse().entries)
    return ExactExpectation("gram-inverse", acc.value, complete)


def exact_covariance(
    x: ProblemMatrix, size: int, cap: int = DEFAULT_SUBSET_CAP
) -> ExactExpectation:
    """Covariance of the padded pseudo-inverse estimator (d-by-d).

    Returns E[P_S^T P_S] - P^T P where P_S is the padded pseudo-inverse and
    P the exact one; under full support this equals
    (n-s)/(s-d+1) * X^{+T} X^+.
    """
    positive, complete = _positive_table(x, size, cap)
    acc = KahanSum((x.d, x.d))
    for sub, prob in positive:
        p_s = pseudo_inverse(x, sub)
        acc.add(prob * (p_s.T @ p_s))
    second_moment = acc.value
    return ExactExpectation(
        "covariance", second_moment - x.pinv.T @ x.pinv, complete
    )


def exact_frobenius_expectation(
    x: ProblemMatrix, size: int, cap: int = DEFAULT_SUBSET_CAP
) -> ExactExpectation:
    """E of the squared Frobenius norm of the padded pseudo-inverse."""
    positive, complete = _positive_table(x, size, cap)
    acc = KahanSum()
    for sub, prob in positive:
        p_s = pseudo_inverse(x, sub)
        acc.add(prob * float(np.sum(p_s * p_s)))
    return ExactExpectation("frobenius", acc.scalar, complete)


def exact_weight_expectation(
    problem: RegressionProblem, size: int, cap: int = DEFAULT_SUBSET_CAP
) -> ExactExpectation:
    """E of the subproblem optimum w_S (a d-vector); unbiased for w*."""
    x = problem.matrix
    positive, complete = _positive_table(x, size, cap)
    acc = KahanSum((x.d,))
    for sub, prob in positive:
        acc.add(prob * solve_subset(problem, sub).weights)
    return ExactExpectation("weight-vector", acc.value, complete)


def exact_loss_expectation(
    problem: RegressionProblem, cap: int = DEFAULT_SUBSET_CAP
) -> ExactExpectation:
    """E of the full-data loss of the size-d subproblem optimum.

    Equals (d+1) L(w*) when the matrix is in general position, and is at
    most that otherwise.
    """
    x = problem.matrix
    positive, complete = _positive_table(x, x.d, cap)
    acc = KahanSum()
    for sub, prob in positive:
        acc.add(prob * solve_subset(problem, sub).loss)
    return ExactExpectation("loss", acc.scalar, complete)


def exact_repeated_sampling_loss(
    problem: RegressionProblem,
    k: int,
    cap: int = DEFAULT_SUBSET_CAP,
    tuple_cap: int = DEFAULT_TUPLE_CAP,
) -> float:
    """E of the full-data loss of the average of k independent size-d optima.

    Enumerates all k-tuples of size-d subsets with product probabilities;
    equals (1 + d/k) L(w*) in general position.
    """
    if k < 1:
        raise SizeRangeError(f"k must be >= 1, got {k}")
    x = problem.matrix
    total_tuples = math.comb(x.n, x.d) ** k
    if total_tuples > tuple_cap:
        raise TooManySubsetsError(
            f"C({x.n}, {x.d})^{k} = {total_tuples} exceeds tuple cap {tuple_cap}"
        )
    positive, _ = _positive_table(x, x.d, cap)
    # Predictions X^T w_S per subset; tuple losses only need their average.
    entries = [
        (prob, x.entries.T @ solve_subset(problem, sub).weights)
        for sub, prob in positive
    ]
    y = problem.labels
    acc = KahanSum()
    for combo in itertools.product(entries, repeat=k):
        prob = math.prod(term[0] for term in combo)
        mean_pred = sum(term[1] for term in combo) / k
        residual = mean_pred - y
        acc.add(prob * float(residual @ residual))
    return acc.scalar


def layer_total_variation(
    x: ProblemMatrix, size: int, cap: int = DEFAULT_SUBSET_CAP
) -> float:
    """TV distance between the enumerated level-``size`` distribution and the
    one obtained by pushing level size+1 through the removal weights."""
    if not x.d <= size < x.n:
        raise SizeRangeError(f"need d <= size < n, got size={size}")
    upper = enumerate_volume_distribution(x, size + 1, cap)
    lower = enumerate_volume_distribution(x, size, cap)
    pushed: dict[tuple[int, ...], float] = {}
    for sub, prob in upper:
        if prob <= 0.0:
            continue
        weights = removal_weights(x, sub)
        for pos, i in enumerate(sub.indices):
            mass = prob * float(weights[pos])
            if mass == 0.0:
                continue
            child = tuple(j for j in sub.indices if j != i)
            pushed[child] = pushed.get(child, 0.0) + mass
    return 0.5 * sum(
        abs(pushed.get(sub.indices, 0.0) - prob) for sub, prob in lower
    )


def layer_consistency_check(
    x: ProblemMatrix, size: int, cap: int = DEFAULT_SUBSET_CAP, tol: float = 1e-9
) -> bool:
    """True iff marginalizing one elimination level reproduces the next.

    Pushing the enumerated size+1 distribution through the conditional
    removal weights must reproduce the enumerated size-``size`` distribution.
    """
    return layer_total_variation(x, size, cap) <= tol
