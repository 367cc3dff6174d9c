"""Exact volume sampling of column subsets of a wide full-rank matrix,
with the unbiased pseudo-inverse and least-squares estimators it enables,
an exact enumeration oracle, and seeded Monte Carlo verification."""

from .errors import (
    DenominatorVanishesError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    MatrixParseError,
    NumericBreakdownError,
    RankDeficientError,
    SingularMatrixError,
    SizeRangeError,
    TooManySubsetsError,
    VolsampleError,
)
from .linalg import (
    ProblemMatrix,
    SpdMatrix,
    gram,
    gram_det,
    pseudo_inverse,
    sherman_morrison_update,
    spd_inverse,
)
from .montecarlo import (
    McConfig,
    VerificationReport,
    mc_verify_gram_inverse,
    mc_verify_loss,
    mc_verify_pinv,
    mc_verify_repeated,
)
from .oracle import (
    ExactExpectation,
    exact_covariance,
    exact_frobenius_expectation,
    exact_gram_inverse_expectation,
    exact_loss_expectation,
    exact_pinv_expectation,
    exact_repeated_sampling_loss,
    exact_weight_expectation,
    layer_consistency_check,
    layer_total_variation,
)
from .regression import (
    RegressionProblem,
    Solution,
    augmented_det_identity,
    averaged_solution,
    leave_one_out_check,
    solve_full,
    solve_subset,
)
from .sampler import (
    SamplerState,
    derive_seed,
    enumerate_volume_distribution,
    has_full_support,
    naive_sample,
    removal_weights,
    reverse_iterative_sample,
    sample_many,
)
from .subsets import IndexSubset
from .suites import all_passed, exact_report, run_exact_suite, run_mc_suite

__version__ = "0.1.0"

__all__ = [
    "DenominatorVanishesError",
    "DimensionMismatchError",
    "ExactExpectation",
    "IndexOutOfRangeError",
    "IndexSubset",
    "MatrixParseError",
    "McConfig",
    "NumericBreakdownError",
    "ProblemMatrix",
    "RankDeficientError",
    "RegressionProblem",
    "SamplerState",
    "SingularMatrixError",
    "SizeRangeError",
    "Solution",
    "SpdMatrix",
    "TooManySubsetsError",
    "VerificationReport",
    "VolsampleError",
    "all_passed",
    "augmented_det_identity",
    "averaged_solution",
    "derive_seed",
    "enumerate_volume_distribution",
    "exact_covariance",
    "exact_frobenius_expectation",
    "exact_gram_inverse_expectation",
    "exact_loss_expectation",
    "exact_pinv_expectation",
    "exact_repeated_sampling_loss",
    "exact_report",
    "exact_weight_expectation",
    "gram",
    "gram_det",
    "has_full_support",
    "layer_consistency_check",
    "layer_total_variation",
    "leave_one_out_check",
    "mc_verify_gram_inverse",
    "mc_verify_loss",
    "mc_verify_pinv",
    "mc_verify_repeated",
    "naive_sample",
    "pseudo_inverse",
    "removal_weights",
    "reverse_iterative_sample",
    "run_exact_suite",
    "run_mc_suite",
    "sample_many",
    "sherman_morrison_update",
    "solve_full",
    "solve_subset",
    "spd_inverse",
]
