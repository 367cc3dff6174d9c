"""Seeded Monte Carlo verification of the expectation identities.

Replicates are drawn through the fast sampler in fixed-size chunks; chunk
boundaries and the reduction order never depend on the thread count, so a
report is bit-reproducible for a given configuration.  Comparisons are
entrywise: the estimate passes when every entry deviates from its predicted
value by at most ``safety_factor`` times its normal-approximation confidence
half-width.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .linalg import ProblemMatrix
from .regression import RegressionProblem, solve_full
from .sampler import derive_seed, sample_many

# Replicates per chunk.  Fixed so that the summation structure (and hence
# the exact floating-point result) is independent of the thread count.
MC_CHUNK = 4096

DEFAULT_SAFETY_FACTOR = 1.5


@dataclass(frozen=True)
class McConfig:
    """Replicate count, master seed, and CI calibration knobs.

    ``absolute_floor`` deflakes checks whose true deviation is pure rounding
    noise: confidence half-widths never shrink below this times the magnitude
    of the predicted value (realizable-label losses, for example, compare two
    1e-30-scale numbers whose sampling noise is itself at that scale).
    """

    replicates: int
    seed: int
    confidence: float = 0.99
    safety_factor: float = DEFAULT_SAFETY_FACTOR
    threads: int = 1
    absolute_floor: float = 1e-10

    def __post_init__(self):
        if self.replicates < 100:
            raise ValueError(f"need >= 100 replicates for a CI, got {self.replicates}")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.safety_factor <= 0.0:
            raise ValueError("safety factor must be positive")
        if self.absolute_floor < 0.0:
            raise ValueError("absolute floor must be nonnegative")


@dataclass(frozen=True, eq=False)
class VerificationReport:
    """Outcome of comparing an estimate against its predicted value.

    The reported deviation and half-width belong to the entry with the least
    slack, so ``passed == (max_abs_deviation <= safety_factor * ci_halfwidth)``
    holds and implies the same bound entrywise.  Exact-enumeration checks
    reuse this type with ``ci_halfwidth`` set to the tolerance,
    ``safety_factor`` 1.0, and ``replicates`` 0.
    """

    quantity: str
    predicted: "np.ndarray | float"
    estimated: "np.ndarray | float"
    max_abs_deviation: float
    ci_halfwidth: float
    passed: bool
    replicates: int
    seed: "int | None"
    safety_factor: float
    note: str = ""
    subchecks: tuple = field(default=())

    def to_dict(self) -> dict:
        def conv(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v

        return {
            "quantity": self.quantity,
            "predicted": conv(self.predicted),
            "estimated": conv(self.estimated),
            "max_abs_deviation": self.max_abs_deviation,
            "ci_halfwidth": self.ci_halfwidth,
            "passed": self.passed,
            "replicates": self.replicates,
            "seed": self.seed,
            "safety_factor": self.safety_factor,
            "note": self.note,
            "subchecks": [s.to_dict() for s in self.subchecks],
        }


def _accumulate(cfg: McConfig, dim: int, chunk_stats):
    """Sum and sum-of-squares of a per-replicate statistic vector.

    ``chunk_stats(seed, count)`` returns the (sum, sumsq) pair over one chunk
    of replicates.  Chunks are reduced in index order regardless of threads.
    """
    bounds = [
        (lo, min(lo + MC_CHUNK, cfg.replicates))
        for lo in range(0, cfg.replicates, MC_CHUNK)
    ]
    jobs = [(derive_seed(cfg.seed, c), hi - lo) for c, (lo, hi) in enumerate(bounds)]
    if cfg.threads == 1 or len(jobs) == 1:
        parts = [chunk_stats(seed, count) for seed, count in jobs]
    else:
        workers = cfg.threads if cfg.threads > 0 else (os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: chunk_stats(*job), jobs))
    total = np.zeros(dim)
    totalsq = np.zeros(dim)
    for part_sum, part_sumsq in parts:
        total += part_sum
        totalsq += part_sumsq
    return total, totalsq


def _compare(quantity, predicted, total, totalsq, cfg, note="", subchecks=()):
    """Entrywise CI comparison of the accumulated mean against a prediction.

    Reported half-widths are floored at ``absolute_floor`` times the scale of
    the prediction, so a deviation at floating-point noise level never fails.
    """
    r = cfg.replicates
    pred = np.asarray(predicted, dtype=float)
    mean = total.reshape(pred.shape) / r
    var = (totalsq.reshape(pred.shape) - r * mean * mean) / max(r - 1, 1)
    sd = np.sqrt(np.maximum(var, 0.0))
    z = float(norm.ppf(0.5 + cfg.confidence / 2.0))
    scale = max(1.0, float(np.abs(pred).max())) if pred.size else 1.0
    ci = np.maximum(z * sd / math.sqrt(r), cfg.absolute_floor * scale)
    dev = np.abs(mean - pred)
    slack = dev - cfg.safety_factor * ci
    binding = int(np.argmax(slack))
    return VerificationReport(
        quantity=quantity,
        predicted=pred if pred.ndim else float(pred),
        estimated=mean if mean.ndim else float(mean),
        max_abs_deviation=float(dev.flat[binding]),
        ci_halfwidth=float(ci.flat[binding]),
        passed=bool(slack.flat[binding] <= 0.0),
        replicates=r,
        seed=cfg.seed,
        safety_factor=cfg.safety_factor,
        note=note,
        subchecks=tuple(subchecks),
    )


def _gathered_columns(x: ProblemMatrix, subsets: np.ndarray) -> np.ndarray:
    """Per-draw column stacks: (B, d, s) for a (B, s) index array."""
    return np.moveaxis(x.entries[:, subsets], 0, 1)


def _batched_gram_inverses(x: ProblemMatrix, subsets: np.ndarray) -> np.ndarray:
    xi = _gathered_columns(x, subsets)
    return np.linalg.inv(xi @ xi.transpose(0, 2, 1))


def _batched_weights(problem: RegressionProblem, subsets: np.ndarray) -> np.ndarray:
    """Subproblem optima for a batch of sampled subsets: (B, d)."""
    xi = _gathered_columns(problem.matrix, subsets)
    grams = xi @ xi.transpose(0, 2, 1)
    rhs = xi @ problem.labels[subsets][:, :, None]
    return np.linalg.solve(grams, rhs)[..., 0]


def mc_verify_pinv(x: ProblemMatrix, size: int, cfg: McConfig) -> VerificationReport:
    """Check that the padded pseudo-inverse averages to the exact one."""
    d, n = x.d, x.n
    col = np.arange(d)

    def chunk_stats(seed, count):
        subsets = sample_many(x, size, count, seed)
        xi = _gathered_columns(x, subsets)
        ginv = np.linalg.inv(xi @ xi.transpose(0, 2, 1))
        rows = xi.transpose(0, 2, 1) @ ginv
        flat = (subsets[:, :, None] * d + col).ravel()
        vals = rows.ravel()
        # Rows outside S are zero; they contribute nothing to either sum.
        return (
            np.bincount(flat, weights=vals, minlength=n * d),
            np.bincount(flat, weights=vals * vals, minlength=n * d),
        )

    total, totalsq = _accumulate(cfg, n * d, chunk_stats)
    return _compare("pseudo-inverse", x.pinv, total, totalsq, cfg)


def mc_verify_gram_inverse(x: ProblemMatrix, size: int, cfg: McConfig) -> VerificationReport:
    """Check the subset Gram inverse against its rescaled full-Gram target.

    The squared-Frobenius-norm identity for the padded pseudo-inverse (the
    trace of the same statistic) is attached as a scalar subcheck.
    """
    d, n = x.d, x.n
    factor = (n - d + 1) / (size - d + 1)

    def chunk_stats(seed, count):
        subsets = sample_many(x, size, count, seed)
        ginv = _batched_gram_inverses(x, subsets)
        stats = np.concatenate(
            [ginv.reshape(count, -1), np.trace(ginv, axis1=1, axis2=2)[:, None]],
            axis=1,
        )
        return stats.sum(axis=0), (stats * stats).sum(axis=0)

    total, totalsq = _accumulate(cfg, d * d + 1, chunk_stats)
    frobenius = _compare(
        "frobenius",
        factor * float(np.sum(x.pinv * x.pinv)),
        total[-1:],
        totalsq[-1:],
        cfg,
    )
    return _compare(
        "gram-inverse",
        factor * x.gram_inverse.entries,
        total[:-1],
        totalsq[:-1],
        cfg,
        subchecks=(frobenius,),
    )


def mc_verify_loss(problem: RegressionProblem, cfg: McConfig) -> VerificationReport:
    """Check that size-d subproblem optima average to (d+1) times the optimum loss."""
    x = problem.matrix
    y = problem.labels

    def chunk_stats(seed, count):
        subsets = sample_many(x, x.d, count, seed)
        w = _batched_weights(problem, subsets)
        residuals = w @ x.entries - y
        losses = np.einsum("ij,ij->i", residuals, residuals)
        return (
            np.array([losses.sum()]),
            np.array([(losses * losses).sum()]),
        )

    total, totalsq = _accumulate(cfg, 1, chunk_stats)
    predicted = (x.d + 1) * solve_full(problem).loss
    return _compare("loss", predicted, total, totalsq, cfg)


def mc_verify_repeated(problem: RegressionProblem, k: int, cfg: McConfig) -> VerificationReport:
    """Check the loss of the k-sample averaged weight vector, target (1 + d/k) L(w*)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    x = problem.matrix
    y = problem.labels

    def chunk_stats(seed, count):
        subsets = sample_many(x, x.d, count * k, seed)
        w = _batched_weights(problem, subsets).reshape(count, k, x.d).mean(axis=1)
        residuals = w @ x.entries - y
        losses = np.einsum("ij,ij->i", residuals, residuals)
        return (
            np.array([losses.sum()]),
            np.array([(losses * losses).sum()]),
        )

    total, totalsq = _accumulate(cfg, 1, chunk_stats)
    predicted = (1.0 + x.d / k) * solve_full(problem).loss
    return _compare(f"repeated-loss[k={k}]", predicted, total, totalsq, cfg)
