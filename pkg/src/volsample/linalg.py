"""Dense linear-algebra kernels: Gram matrices, SPD inversion via a pivoted
Cholesky-style factorization, padded pseudo-inverses, determinants with
exact-zero semantics for detected rank deficiency, and rank-one inverse
updates."""

from __future__ import annotations

import math
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DenominatorVanishesError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    RankDeficientError,
    SingularMatrixError,
)
from .subsets import IndexSubset

# Relative pivot tolerance: a Cholesky pivot below PIVOT_RTOL * trace(A)/k
# flags the matrix as rank deficient.
PIVOT_RTOL = 1e-12

# Relative asymmetry allowed when wrapping a matrix as symmetric.
SYMMETRY_RTOL = 1e-12

# Denominator guard for rank-one inverse updates.
UPDATE_DENOM_TOL = 1e-12


def cholesky_factor(a: np.ndarray) -> tuple[np.ndarray, bool]:
    """Lower-triangular factor of a symmetric matrix with pivot monitoring.

    Returns ``(L, ok)``.  ``ok`` is False as soon as a pivot drops to or
    below ``PIVOT_RTOL * trace(a) / k``; the returned factor is then only
    partially filled and must not be used for solves.
    """
    a = np.asarray(a, dtype=float)
    k = a.shape[0]
    tol = PIVOT_RTOL * float(np.trace(a)) / k if k else 0.0
    lower = np.zeros_like(a)
    for j in range(k):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if not pivot > tol:
            return lower, False
        root = math.sqrt(pivot)
        lower[j, j] = root
        if j + 1 < k:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / root
    return lower, True


class SpdMatrix:
    """Symmetric real matrix with a cached triangular factorization.

    The factorization provides the determinant, a rank-deficiency flag, and
    the inverse; a matrix whose factorization hits a non-positive pivot is
    usable for determinants (reported as exactly 0) but not for inversion.
    """

    def __init__(self, entries: np.ndarray):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got {a.shape}")
        scale = float(np.abs(a).max()) if a.size else 0.0
        asym = float(np.abs(a - a.T).max()) if a.size else 0.0
        if asym > SYMMETRY_RTOL * max(1.0, scale):
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:g})")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._entries = a

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def size(self) -> int:
        return self._entries.shape[0]

    @cached_property
    def _factor(self) -> tuple[np.ndarray, bool]:
        return cholesky_factor(self._entries)

    @property
    def is_positive_definite(self) -> bool:
        return self._factor[1]

    def determinant(self) -> float:
        """det(A); exactly 0.0 when the factorization detects rank deficiency."""
        lower, ok = self._factor
        if not ok:
            return 0.0
        return math.exp(2.0 * float(np.sum(np.log(np.diagonal(lower)))))

    def logdet(self) -> float:
        """log det(A); -inf when the factorization detects rank deficiency."""
        lower, ok = self._factor
        if not ok:
            return float("-inf")
        return 2.0 * float(np.sum(np.log(np.diagonal(lower))))

    def inverse(self) -> "SpdMatrix":
        """A^{-1} through the cached factor; raises if a pivot was rejected."""
        lower, ok = self._factor
        if not ok:
            raise SingularMatrixError("factorization pivot below tolerance")
        half = solve_triangular(lower, np.eye(self.size), lower=True)
        inv = solve_triangular(lower.T, half, lower=False)
        return SpdMatrix(0.5 * (inv + inv.T))

    def solve(self, b: np.ndarray) -> np.ndarray:
        lower, ok = self._factor
        if not ok:
            raise SingularMatrixError("factorization pivot below tolerance")
        return solve_triangular(lower.T, solve_triangular(lower, b, lower=True), lower=False)


class ProblemMatrix:
    """A wide full-row-rank d-by-n design matrix with cached Gram matrix.

    Construction rejects tall inputs (transpose first) and matrices whose
    Gram factorization detects rank deficiency.
    """

    def __init__(self, entries):
        x = np.array(entries, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-d array, got ndim={x.ndim}")
        d, n = x.shape
        if d < 1 or n < 1:
            raise DimensionMismatchError("matrix must be non-empty")
        if d > n:
            raise DimensionMismatchError(
                f"need n >= d (wide matrix), got d={d}, n={n}; transpose tall inputs"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("matrix entries must be finite")
        x.setflags(write=False)
        self._entries = x
        self._gram = SpdMatrix(x @ x.T)
        if not self._gram.is_positive_definite:
            raise RankDeficientError(f"matrix does not have full row rank {d}")

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def d(self) -> int:
        return self._entries.shape[0]

    @property
    def n(self) -> int:
        return self._entries.shape[1]

    @property
    def gram(self) -> SpdMatrix:
        """The cached full Gram matrix X X^T."""
        return self._gram

    @cached_property
    def gram_inverse(self) -> SpdMatrix:
        return self._gram.inverse()

    @cached_property
    def pinv(self) -> np.ndarray:
        """The n-by-d Moore-Penrose pseudo-inverse X^T (X X^T)^{-1}."""
        out = self._entries.T @ self.gram_inverse.entries
        out.setflags(write=False)
        return out

    def column(self, i: int) -> np.ndarray:
        if not 0 <= i < self.n:
            raise IndexOutOfRangeError(f"column {i} outside [0, {self.n - 1}]")
        return self._entries[:, i]

    def columns(self, s: "IndexSubset | Iterable[int]") -> np.ndarray:
        """The d-by-|S| submatrix of the columns indexed by ``s``."""
        sub = IndexSubset.coerce(s, self.n)
        return self._entries[:, list(sub.indices)]


def gram(x: ProblemMatrix, s: "IndexSubset | Iterable[int]") -> SpdMatrix:
    """The d-by-d Gram matrix X_S X_S^T of the columns indexed by ``s``."""
    cols = x.columns(s)
    return SpdMatrix(cols @ cols.T)


def spd_inverse(a: SpdMatrix) -> SpdMatrix:
    """Inverse of a positive-definite matrix through its triangular factor."""
    return a.inverse()


def gram_det(x: ProblemMatrix, s: "IndexSubset | Iterable[int]") -> float:
    """det(X_S X_S^T); exactly 0.0 when rank deficiency is detected."""
    return gram(x, s).determinant()


def pseudo_inverse(x: ProblemMatrix, s: "IndexSubset | Iterable[int]") -> np.ndarray:
    """The n-by-d padded pseudo-inverse of X with all columns outside S zeroed.

    Rows indexed by S hold X_S^T (X_S X_S^T)^{-1}; all other rows are zero.
    Raises SingularMatrixError when rank(X_S) < d.
    """
    sub = IndexSubset.coerce(s, x.n)
    cols = x.columns(sub)
    inv = SpdMatrix(cols @ cols.T).inverse()
    out = np.zeros((x.n, x.d))
    out[list(sub.indices), :] = cols.T @ inv.entries
    return out


def sherman_morrison_update(ainv: SpdMatrix, u: np.ndarray, sign: int) -> SpdMatrix:
    """(A + sign * u u^T)^{-1} from A^{-1} via the rank-one update identity."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    u = np.asarray(u, dtype=float)
    if u.shape != (ainv.size,):
        raise DimensionMismatchError(f"update vector shape {u.shape} != ({ainv.size},)")
    w = ainv.entries @ u
    denom = 1.0 + sign * float(u @ w)
    if abs(denom) <= UPDATE_DENOM_TOL:
        raise DenominatorVanishesError(f"update denominator {denom:g} within tolerance of 0")
    return SpdMatrix(ainv.entries - sign * np.outer(w, w) / denom)
