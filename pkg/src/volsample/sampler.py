"""Size-s volume sampling of column subsets.

A size-s subset S of the columns of a wide full-rank matrix X is volume
sampled when P(S) is proportional to det(X_S X_S^T).  The fast path starts
from the full column set and repeatedly removes one column, with removal
weights given by complements of leverage scores; the inverse Gram matrix is
maintained by rank-one updates so a draw costs O((n-s+d)nd) time and
O(d^2 + n) working memory.  A slow exact enumeration over all subsets backs
the fast path as a correctness oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import NumericBreakdownError, SizeRangeError, TooManySubsetsError
from .linalg import ProblemMatrix, SpdMatrix, gram, gram_det
from .subsets import IndexSubset

# Exhaustive enumeration refuses to touch more subsets than this by default.
DEFAULT_SUBSET_CAP = 10**6

# If the clamped removal weights sum to no more than this while columns still
# must be removed, the elimination has numerically broken down.
BREAKDOWN_TOL = 1e-10

# Weights in [-NEGATIVE_WEIGHT_CLAMP, 0) are floating-point dust below an
# exact zero and are clamped before any categorical draw.
NEGATIVE_WEIGHT_CLAMP = 1e-9


@dataclass(frozen=True, eq=False)
class SamplerState:
    """Live state of one reverse-elimination run after a removal step.

    ``weights`` holds 1 - x_i^T Z x_i for each surviving column i, aligned
    with ``survivors``; ``inverse_gram`` is the incrementally maintained
    (X_S X_S^T)^{-1}.
    """

    survivors: IndexSubset
    weights: np.ndarray
    inverse_gram: SpdMatrix


def derive_seed(master_seed: int, stream_index: int) -> int:
    """Well-mixed 64-bit child seed for an independent stream."""
    ss = np.random.SeedSequence((int(master_seed), int(stream_index)))
    return int(ss.generate_state(1, np.uint64)[0])


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _validate_size(x: ProblemMatrix, size: int) -> None:
    if not x.d <= size <= x.n:
        raise SizeRangeError(f"sample size must be in [{x.d}, {x.n}], got {size}")


def _leverage_scores(z: np.ndarray, cols: np.ndarray, block: int = 1024) -> np.ndarray:
    """x_i^T Z x_i for every column, in column blocks to bound temporaries."""
    n = cols.shape[1]
    out = np.empty(n)
    for start in range(0, n, block):
        c = cols[:, start : start + block]
        out[start : start + block] = np.einsum("ij,ij->j", c, z @ c)
    return out


def reverse_iterative_sample(
    x: ProblemMatrix,
    size: int,
    seed,
    observer: "Callable[[SamplerState], None] | None" = None,
) -> IndexSubset:
    """Draw one volume-sampled subset of ``size`` columns.

    Starts from all n columns and removes one at a time: column i is removed
    with probability proportional to 1 - x_i^T Z x_i where Z is the inverse
    Gram matrix of the surviving columns, maintained by rank-one updates in a
    compiled kernel.  Exactly one uniform drives each removal, so a fixed
    integer seed fully determines the draw; a Generator may be passed instead
    to take several samples from one stream.  ``observer``, if given, is
    called with a `SamplerState` snapshot after every removal (intended for
    verification; it does not change the sampled subset).
    """
    from ._kernels import eliminate_steps  # deferred: numba import is heavy

    _validate_size(x, size)
    rng = _as_rng(seed)
    n = x.n
    xe = x.entries
    z = np.array(x.gram_inverse.entries)
    p = 1.0 - _leverage_scores(z, xe)
    scratch = np.empty(n)
    alive = np.ones(n, dtype=np.bool_)
    if observer is None:
        done = eliminate_steps(
            xe, z, p, scratch, alive, rng.random(n - size), size, BREAKDOWN_TOL
        )
        if done < 0:
            raise NumericBreakdownError("removal weights collapsed mid-elimination")
    else:
        remaining = n
        while remaining > size:
            done = eliminate_steps(
                xe, z, p, scratch, alive, rng.random(1), remaining - 1, BREAKDOWN_TOL
            )
            if done < 0:
                raise NumericBreakdownError("removal weights collapsed mid-elimination")
            remaining -= 1
            idx = np.flatnonzero(alive)
            observer(
                SamplerState(
                    survivors=IndexSubset(tuple(int(j) for j in idx), n),
                    weights=p[idx].copy(),
                    inverse_gram=SpdMatrix(z.copy()),
                )
            )
    return IndexSubset(tuple(int(j) for j in np.flatnonzero(alive)), n)


def sample_many(x: ProblemMatrix, size: int, count: int, seed) -> np.ndarray:
    """Draw ``count`` independent volume samples as a (count, size) index array.

    Runs the same elimination rule as `reverse_iterative_sample` across all
    draws in lock step (every chain removes its t-th column in round t), so
    large batches cost a few vectorized operations per round instead of a
    Python-level loop per draw.  Rows are sorted ascending.
    """
    _validate_size(x, size)
    count = int(count)
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    n, d = x.n, x.d
    if count == 0:
        return np.empty((0, size), dtype=np.int64)
    steps = n - size
    if steps == 0:
        return np.tile(np.arange(n, dtype=np.int64), (count, 1))
    rng = _as_rng(seed)
    xe = x.entries
    lev = _leverage_scores(x.gram_inverse.entries, xe)
    p = np.tile(1.0 - lev, (count, 1))
    z = np.tile(x.gram_inverse.entries, (count, 1, 1))
    alive = np.ones((count, n), dtype=bool)
    rows = np.arange(count)
    for _ in range(steps):
        weights = np.maximum(p, 0.0)
        cum = np.cumsum(weights, axis=1)
        totals = cum[:, -1]
        if np.any(totals <= BREAKDOWN_TOL):
            raise NumericBreakdownError("removal weights collapsed in a batched draw")
        targets = rng.random(count) * totals
        idx = (cum <= targets[:, None]).sum(axis=1)
        np.minimum(idx, n - 1, out=idx)
        # Rounding residue: walk back to the last positive weight.
        bad = weights[rows, idx] <= 0.0
        while np.any(bad):
            idx[bad] -= 1
            bad = weights[rows, idx] <= 0.0
        pi = p[rows, idx]
        xi = xe[:, idx]
        v = np.einsum("rij,jr->ri", z, xi) / np.sqrt(pi)[:, None]
        t = v @ xe
        p -= t * t
        p[rows, idx] = 0.0
        alive[rows, idx] = False
        z += v[:, :, None] * v[:, None, :]
    # Stable argsort puts surviving indices first, in ascending order.
    return np.argsort(~alive, axis=1, kind="stable")[:, :size].astype(np.int64)


def removal_weights(x: ProblemMatrix, s: "IndexSubset | Iterable[int]") -> np.ndarray:
    """Conditional removal distribution P(S - {i} | S) over i in S.

    Entry j is (1 - x_i^T (X_S X_S^T)^{-1} x_i) / (|S| - d) for the j-th
    surviving index; the entries sum to 1.  Requires |S| > d and rank d.
    """
    sub = IndexSubset.coerce(s, x.n)
    if len(sub) <= x.d:
        raise SizeRangeError(f"need |S| > d for removal weights, got |S|={len(sub)}")
    ginv = gram(x, sub).inverse().entries
    cols = x.columns(sub)
    lev = np.einsum("ij,ij->j", cols, ginv @ cols)
    weights = (1.0 - lev) / (len(sub) - x.d)
    weights[(weights < 0.0) & (weights >= -NEGATIVE_WEIGHT_CLAMP)] = 0.0
    return weights


def enumerate_volume_distribution(
    x: ProblemMatrix, size: int, cap: int = DEFAULT_SUBSET_CAP
) -> list[tuple[IndexSubset, float]]:
    """Exhaustive (subset, probability) table over all size-``size`` subsets.

    Each probability is the determinant ratio
    det(X_S X_S^T) / (C(n-d, s-d) det(X X^T)), evaluated in log space; rank
    deficient subsets get probability exactly 0.  Subsets appear in
    lexicographic order.
    """
    _validate_size(x, size)
    total = math.comb(x.n, size)
    if total > cap:
        raise TooManySubsetsError(f"C({x.n}, {size}) = {total} exceeds cap {cap}")
    log_norm = math.log(math.comb(x.n - x.d, size - x.d)) + x.gram.logdet()
    table = []
    for combo in itertools.combinations(range(x.n), size):
        logdet = gram(x, combo).logdet()
        prob = 0.0 if logdet == float("-inf") else math.exp(logdet - log_norm)
        table.append((IndexSubset(combo, x.n), prob))
    return table


def naive_sample(
    x: ProblemMatrix, size: int, seed, cap: int = DEFAULT_SUBSET_CAP
) -> IndexSubset:
    """Exact draw by inverse CDF over the enumerated distribution."""
    table = enumerate_volume_distribution(x, size, cap)
    u = _as_rng(seed).random()
    acc = 0.0
    last_positive = None
    for sub, prob in table:
        if prob <= 0.0:
            continue
        last_positive = sub
        acc += prob
        if u < acc:
            return sub
    # Rounding residue (cumulative sum just under 1): last positive entry.
    assert last_positive is not None
    return last_positive


def has_full_support(x: ProblemMatrix, size: int, cap: int = DEFAULT_SUBSET_CAP) -> bool:
    """True iff every size-``size`` subset has positive Gram determinant.

    For size == d this is the matrix being in general position.
    """
    _validate_size(x, size)
    total = math.comb(x.n, size)
    if total > cap:
        raise TooManySubsetsError(f"C({x.n}, {size}) = {total} exceeds cap {cap}")
    for combo in itertools.combinations(range(x.n), size):
        if gram_det(x, combo) <= 0.0:
            return False
    return True
