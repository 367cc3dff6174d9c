"""Least-squares machinery over labeled columns.

Every loss reported here is the full-data loss ||X^T w - y||^2 over all n
labeled columns, including for solutions fitted on a subset of the labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError
from .linalg import ProblemMatrix, SpdMatrix
from .subsets import IndexSubset


@dataclass(frozen=True, eq=False)
class RegressionProblem:
    """A design matrix paired with one label per column."""

    matrix: ProblemMatrix
    labels: np.ndarray

    def __post_init__(self):
        y = np.array(self.labels, dtype=float).reshape(-1)
        if y.shape[0] != self.matrix.n:
            raise DimensionMismatchError(
                f"label count {y.shape[0]} != column count {self.matrix.n}"
            )
        y.setflags(write=False)
        object.__setattr__(self, "labels", y)

    @classmethod
    def from_arrays(cls, entries, labels) -> "RegressionProblem":
        return cls(ProblemMatrix(entries), np.asarray(labels, dtype=float))

    def loss(self, w: np.ndarray) -> float:
        """Full-data squared loss of a weight vector."""
        r = self.matrix.entries.T @ np.asarray(w, dtype=float) - self.labels
        return float(r @ r)


@dataclass(frozen=True, eq=False)
class Solution:
    """A weight vector, its full-data loss, and the labels it consumed."""

    weights: np.ndarray
    loss: float
    support: IndexSubset


def solve_full(problem: RegressionProblem) -> Solution:
    """The optimum over all n labels: w* = (X X^T)^{-1} X y."""
    x = problem.matrix
    w = x.gram_inverse.entries @ (x.entries @ problem.labels)
    return Solution(weights=w, loss=problem.loss(w), support=IndexSubset.full(x.n))


def solve_subset(problem: RegressionProblem, s: "IndexSubset | Iterable[int]") -> Solution:
    """The optimum of the subproblem on the columns and labels in ``s``.

    The reported loss is the full-data loss of that weight vector, not the
    subproblem loss.  Raises SingularMatrixError when rank(X_S) < d; the
    estimators are only defined where volume sampling puts positive mass.
    """
    x = problem.matrix
    sub = IndexSubset.coerce(s, x.n)
    cols = x.columns(sub)
    ys = problem.labels[list(sub.indices)]
    w = SpdMatrix(cols @ cols.T).solve(cols @ ys)
    return Solution(weights=w, loss=problem.loss(w), support=sub)


def averaged_solution(
    problem: RegressionProblem, samples: Sequence["IndexSubset | Iterable[int]"]
) -> Solution:
    """The mean of the per-sample subproblem optima, with its full-data loss."""
    if len(samples) < 1:
        raise ValueError("need at least one sample to average")
    solutions = [solve_subset(problem, s) for s in samples]
    w = np.mean([sol.weights for sol in solutions], axis=0)
    union: set[int] = set()
    for sol in solutions:
        union.update(sol.support.indices)
    support = IndexSubset.of(union, problem.matrix.n)
    return Solution(weights=w, loss=problem.loss(w), support=support)


def leave_one_out_check(problem: RegressionProblem, i: int) -> tuple[float, float]:
    """Both sides of the leave-one-out loss identity for column ``i``.

    lhs is the loss of the optimum over all labels; rhs rebuilds it from the
    solution trained without column i, the full-Gram leverage of x_i, and the
    held-out residual: rhs = L(w_{-i}) - x_i^T (X X^T)^{-1} x_i * l_i(w_{-i}).
    """
    x = problem.matrix
    full = solve_full(problem)
    drop = solve_subset(problem, IndexSubset.full(x.n).without(i))
    xi = x.column(i)
    leverage = float(xi @ (x.gram_inverse.entries @ xi))
    residual_sq = float((xi @ drop.weights - problem.labels[i]) ** 2)
    return full.loss, drop.loss - leverage * residual_sq


def augmented_det_identity(problem: RegressionProblem) -> tuple[float, float]:
    """Both sides of det(Xt Xt^T) = det(X X^T) L(w*), Xt = X with row y^T.

    The left side is the squared volume of the label-augmented matrix; the
    right side is the base-times-height factorization through the optimal
    loss.  Realizable labels make both sides zero.
    """
    x = problem.matrix
    augmented = np.vstack([x.entries, problem.labels])
    lhs = SpdMatrix(augmented @ augmented.T).determinant()
    rhs = x.gram.determinant() * solve_full(problem).loss
    return lhs, rhs
