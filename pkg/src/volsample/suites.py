"""Assembly of the exact and Monte Carlo verification suites.

Each closed-form identity becomes one `VerificationReport`; the exact suite
compares enumerated expectations at pinned tolerances, the Monte Carlo suite
delegates to the seeded estimators.  Shared by the CLI and the acceptance
tests.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import SingularMatrixError, TooManySubsetsError
from .linalg import ProblemMatrix, gram_det
from .montecarlo import (
    McConfig,
    VerificationReport,
    mc_verify_gram_inverse,
    mc_verify_loss,
    mc_verify_pinv,
    mc_verify_repeated,
)
from .oracle import (
    DEFAULT_TUPLE_CAP,
    KahanSum,
    exact_covariance,
    exact_frobenius_expectation,
    exact_gram_inverse_expectation,
    exact_loss_expectation,
    exact_pinv_expectation,
    exact_repeated_sampling_loss,
    exact_weight_expectation,
    layer_total_variation,
)
from .regression import (
    RegressionProblem,
    augmented_det_identity,
    leave_one_out_check,
    solve_full,
)
from .sampler import DEFAULT_SUBSET_CAP

EXACT_TOL = 1e-9
LOO_TOL = 1e-8


def exact_report(
    quantity: str,
    predicted,
    estimated,
    tolerance: float,
    note: str = "",
    deviation: "float | None" = None,
) -> VerificationReport:
    """A tolerance comparison wrapped as a report (no sampling involved).

    ``deviation`` overrides the default max-entrywise deviation for
    inequality-style checks where the violation amount is the statistic.
    """
    pred = np.asarray(predicted, dtype=float)
    est = np.asarray(estimated, dtype=float)
    if deviation is None:
        deviation = float(np.max(np.abs(est - pred))) if est.size else 0.0
    return VerificationReport(
        quantity=quantity,
        predicted=pred if pred.ndim else float(pred),
        estimated=est if est.ndim else float(est),
        max_abs_deviation=deviation,
        ci_halfwidth=tolerance,
        passed=deviation <= tolerance,
        replicates=0,
        seed=None,
        safety_factor=1.0,
        note=note,
    )


def _relative_tol(base: float, *magnitudes: float) -> float:
    return base * max(1.0, *(abs(m) for m in magnitudes))


def _psd_violation(matrix: np.ndarray) -> float:
    """How far the symmetric matrix is from being positive semidefinite."""
    return max(0.0, -float(np.linalg.eigvalsh(matrix)[0]))


def run_exact_suite(
    x: ProblemMatrix,
    labels: "np.ndarray | None",
    size: int,
    cap: int = DEFAULT_SUBSET_CAP,
    tuple_cap: int = DEFAULT_TUPLE_CAP,
) -> list[VerificationReport]:
    """Every enumerable identity on one instance, at its pinned tolerance."""
    d, n = x.d, x.n
    reports = []

    pinv = exact_pinv_expectation(x, size, cap)
    reports.append(exact_report("pseudo-inverse", x.pinv, pinv.value, EXACT_TOL))

    ginv = exact_gram_inverse_expectation(x, size, cap)
    scaled = (n - d + 1) / (size - d + 1) * x.gram_inverse.entries
    if ginv.support_complete:
        reports.append(exact_report("gram-inverse", scaled, ginv.value, EXACT_TOL))
    else:
        reports.append(
            exact_report(
                "gram-inverse",
                scaled,
                ginv.value,
                EXACT_TOL,
                note="psd branch verified (incomplete support)",
                deviation=_psd_violation(scaled - ginv.value),
            )
        )

    cov = exact_covariance(x, size, cap)
    cov_scaled = (n - size) / (size - d + 1) * (x.pinv.T @ x.pinv)
    if cov.support_complete:
        reports.append(exact_report("covariance", cov_scaled, cov.value, EXACT_TOL))
    else:
        reports.append(
            exact_report(
                "covariance",
                cov_scaled,
                cov.value,
                EXACT_TOL,
                note="psd branch verified (incomplete support)",
                deviation=_psd_violation(cov_scaled - cov.value),
            )
        )

    frob = exact_frobenius_expectation(x, size, cap)
    frob_target = (n - d + 1) / (size - d + 1) * float(np.sum(x.pinv * x.pinv))
    if frob.support_complete:
        reports.append(exact_report("frobenius", frob_target, frob.value, EXACT_TOL))
    else:
        reports.append(
            exact_report(
                "frobenius",
                frob_target,
                frob.value,
                EXACT_TOL,
                note="upper bound verified (incomplete support)",
                deviation=max(0.0, float(frob.value) - frob_target),
            )
        )

    acc = KahanSum()
    for combo in itertools.combinations(range(n), size):
        acc.add(gram_det(x, combo))
    binet_target = math.comb(n - d, size - d) * x.gram.determinant()
    reports.append(
        exact_report(
            "cauchy-binet",
            binet_target,
            acc.scalar,
            _relative_tol(EXACT_TOL, binet_target),
            note="relative 1e-9",
        )
    )

    if size < n:
        tv = layer_total_variation(x, size, cap)
        reports.append(
            exact_report("layer-consistency", 0.0, tv, EXACT_TOL, deviation=tv)
        )

    if labels is None:
        return reports

    problem = RegressionProblem(x, labels)
    optimum = solve_full(problem)

    weights = exact_weight_expectation(problem, size, cap)
    reports.append(
        exact_report("weight-vector", optimum.weights, weights.value, EXACT_TOL)
    )

    loss = exact_loss_expectation(problem, cap)
    loss_target = (d + 1) * optimum.loss
    if loss.support_complete:
        reports.append(
            exact_report(
                "loss", loss_target, loss.value, _relative_tol(EXACT_TOL, loss_target)
            )
        )
    else:
        reports.append(
            exact_report(
                "loss",
                loss_target,
                loss.value,
                EXACT_TOL,
                note="upper bound verified (not in general position)",
                deviation=max(0.0, float(loss.value) - loss_target),
            )
        )

    for k in (1, 2, 3):
        try:
            repeated = exact_repeated_sampling_loss(problem, k, cap, tuple_cap)
        except TooManySubsetsError:
            break
        target = (1.0 + d / k) * optimum.loss
        reports.append(
            exact_report(
                f"repeated-loss[k={k}]",
                target,
                repeated,
                _relative_tol(EXACT_TOL, target),
                note="relative 1e-9",
            )
        )

    worst = 0.0
    checked = 0
    for i in range(n):
        try:
            lhs, rhs = leave_one_out_check(problem, i)
        except SingularMatrixError:
            continue
        checked += 1
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    if checked:
        reports.append(
            exact_report(
                "leave-one-out",
                0.0,
                worst,
                LOO_TOL,
                note=f"worst relative gap over {checked} droppable columns",
                deviation=worst,
            )
        )

    lhs, rhs = augmented_det_identity(problem)
    reports.append(
        exact_report(
            "augmented-det",
            rhs,
            lhs,
            _relative_tol(EXACT_TOL, lhs, rhs),
            note="relative 1e-9",
        )
    )
    return reports


def run_mc_suite(
    x: ProblemMatrix,
    labels: "np.ndarray | None",
    size: int,
    cfg: McConfig,
    k: int = 2,
) -> list[VerificationReport]:
    """Every Monte Carlo check applicable to one instance."""
    reports = [
        mc_verify_pinv(x, size, cfg),
        mc_verify_gram_inverse(x, size, cfg),
    ]
    if labels is not None:
        problem = RegressionProblem(x, labels)
        reports.append(mc_verify_loss(problem, cfg))
        reports.append(mc_verify_repeated(problem, k, cfg))
    return reports


def all_passed(reports) -> bool:
    """True iff every report and every nested subcheck passed."""
    for report in reports:
        if not report.passed:
            return False
        if not all_passed(report.subchecks):
            return False
    return True
