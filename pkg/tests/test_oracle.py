import itertools
import math

import numpy as np
import pytest
from conftest import random_full_rank

from volsample import (
    ProblemMatrix,
    RegressionProblem,
    TooManySubsetsError,
    exact_covariance,
    exact_frobenius_expectation,
    exact_gram_inverse_expectation,
    exact_loss_expectation,
    exact_pinv_expectation,
    exact_repeated_sampling_loss,
    exact_weight_expectation,
    layer_consistency_check,
    layer_total_variation,
    solve_full,
)

X3 = ProblemMatrix([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
ONES = RegressionProblem(ProblemMatrix([1.0, 1.0, 1.0]), [1.0, 1.0, 0.0])
# Third column duplicates the first: size-2 sampling lacks full support.
DUP = ProblemMatrix([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])


def numpy_distribution(entries, size):
    """Independent enumeration: subsets and det-ratio probabilities via numpy."""
    d, n = entries.shape
    dets = {}
    for combo in itertools.combinations(range(n), size):
        sub = entries[:, combo]
        det = np.linalg.det(sub @ sub.T)
        dets[combo] = max(det, 0.0)
    norm = math.comb(n - d, size - d) * np.linalg.det(entries @ entries.T)
    return {combo: det / norm for combo, det in dets.items()}


class TestExactPinvExpectation:
    def test_single_subset(self):
        x = ProblemMatrix(np.eye(2))
        out = exact_pinv_expectation(x, 2)
        np.testing.assert_allclose(out.value, np.eye(2))
        assert out.support_complete

    def test_three_column_instance(self):
        out = exact_pinv_expectation(X3, 2)
        np.testing.assert_allclose(out.value, X3.pinv, atol=1e-12)

    def test_full_size_is_exact(self):
        out = exact_pinv_expectation(X3, 3)
        np.testing.assert_allclose(out.value, X3.pinv, atol=1e-15)

    def test_matches_numpy_enumeration(self):
        rng = np.random.default_rng(0)
        x = random_full_rank(rng, 2, 6)
        for size in (2, 3, 5):
            expected = np.zeros((6, 2))
            for combo, prob in numpy_distribution(x.entries, size).items():
                masked = np.zeros_like(x.entries)
                masked[:, combo] = x.entries[:, combo]
                expected += prob * np.linalg.pinv(masked)
            out = exact_pinv_expectation(x, size)
            np.testing.assert_allclose(out.value, expected, atol=1e-10)
            np.testing.assert_allclose(out.value, x.pinv, atol=1e-10)


class TestExactGramInverseExpectation:
    def test_scaling_factor_two(self):
        out = exact_gram_inverse_expectation(X3, 2)
        target = 2.0 * X3.gram_inverse.entries
        np.testing.assert_allclose(out.value, target, atol=1e-12)
        np.testing.assert_allclose(
            out.value, (2.0 / 3.0) * np.array([[2.0, -1.0], [-1.0, 2.0]]), atol=1e-12
        )

    def test_full_size_factor_one(self):
        out = exact_gram_inverse_expectation(X3, 3)
        np.testing.assert_allclose(out.value, X3.gram_inverse.entries, atol=1e-15)

    def test_semidefinite_branch_without_full_support(self):
        out = exact_gram_inverse_expectation(DUP, 2)
        assert not out.support_complete
        scaled = 2.0 * DUP.gram_inverse.entries
        eigenvalues = np.linalg.eigvalsh(scaled - out.value)
        assert eigenvalues[0] >= -1e-9

    def test_matches_numpy_enumeration(self):
        rng = np.random.default_rng(1)
        x = random_full_rank(rng, 3, 7)
        size = 4
        expected = np.zeros((3, 3))
        for combo, prob in numpy_distribution(x.entries, size).items():
            sub = x.entries[:, combo]
            expected += prob * np.linalg.inv(sub @ sub.T)
        out = exact_gram_inverse_expectation(x, size)
        np.testing.assert_allclose(out.value, expected, atol=1e-10)
        factor = (7 - 3 + 1) / (size - 3 + 1)
        np.testing.assert_allclose(out.value, factor * x.gram_inverse.entries, atol=1e-9)


class TestExactCovariance:
    def test_zero_at_full_size(self):
        out = exact_covariance(X3, 3)
        np.testing.assert_allclose(out.value, np.zeros((2, 2)), atol=1e-14)

    def test_three_column_instance(self):
        out = exact_covariance(X3, 2)
        np.testing.assert_allclose(
            out.value, np.array([[2.0, -1.0], [-1.0, 2.0]]) / 3.0, atol=1e-12
        )

    def test_matches_scaled_projector(self):
        rng = np.random.default_rng(2)
        x = random_full_rank(rng, 2, 7)
        for size in (2, 4, 6):
            out = exact_covariance(x, size)
            factor = (7 - size) / (size - 2 + 1)
            target = factor * (x.pinv.T @ x.pinv)
            np.testing.assert_allclose(out.value, target, atol=1e-9)


class TestExactFrobeniusExpectation:
    def test_hand_computed_value(self):
        out = exact_frobenius_expectation(X3, 2)
        assert out.value == pytest.approx(8.0 / 3.0, rel=1e-12)

    def test_scaling_identity(self):
        rng = np.random.default_rng(3)
        x = random_full_rank(rng, 3, 8)
        norm = float(np.sum(x.pinv * x.pinv))
        for size in (3, 5, 8):
            out = exact_frobenius_expectation(x, size)
            factor = (8 - 3 + 1) / (size - 3 + 1)
            assert out.value == pytest.approx(factor * norm, rel=1e-10)


class TestExactWeightExpectation:
    def test_singleton_mean(self):
        out = exact_weight_expectation(ONES, 1)
        assert out.value[0] == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_realizable_labels(self):
        rng = np.random.default_rng(4)
        x = random_full_rank(rng, 2, 5)
        w0 = rng.standard_normal(2)
        problem = RegressionProblem(x, x.entries.T @ w0)
        for size in (2, 3, 5):
            out = exact_weight_expectation(problem, size)
            np.testing.assert_allclose(out.value, w0, atol=1e-10)

    def test_unbiased_for_random_labels(self):
        rng = np.random.default_rng(5)
        problem = RegressionProblem(X3, rng.standard_normal(3))
        w_star = solve_full(problem).weights
        for size in (2, 3):
            out = exact_weight_expectation(problem, size)
            np.testing.assert_allclose(out.value, w_star, atol=1e-10)


class TestExactLossExpectation:
    def test_hand_computed_value(self):
        out = exact_loss_expectation(ONES)
        assert out.value == pytest.approx(4.0 / 3.0, rel=1e-12)
        assert out.value == pytest.approx(2.0 * solve_full(ONES).loss, rel=1e-12)

    def test_realizable_labels(self):
        rng = np.random.default_rng(6)
        x = random_full_rank(rng, 2, 6)
        problem = RegressionProblem(x, x.entries.T @ np.array([0.5, 2.0]))
        assert exact_loss_expectation(problem).value == pytest.approx(0.0, abs=1e-18)

    def test_d_plus_one_factor(self):
        rng = np.random.default_rng(7)
        problem = RegressionProblem(X3, rng.standard_normal(3))
        out = exact_loss_expectation(problem)
        assert out.value == pytest.approx(3.0 * solve_full(problem).loss, rel=1e-10)

    def test_upper_bound_without_general_position(self):
        rng = np.random.default_rng(8)
        problem = RegressionProblem(DUP, rng.standard_normal(3))
        out = exact_loss_expectation(problem)
        assert not out.support_complete
        bound = (DUP.d + 1) * solve_full(problem).loss
        assert out.value <= bound + 1e-9


class TestExactRepeatedSamplingLoss:
    def test_reduces_to_loss_expectation_at_k_one(self):
        assert exact_repeated_sampling_loss(ONES, 1) == pytest.approx(
            float(exact_loss_expectation(ONES).value), rel=1e-12
        )

    def test_hand_computed_nine_tuples(self):
        assert exact_repeated_sampling_loss(ONES, 2) == pytest.approx(1.0, rel=1e-12)

    def test_realizable_labels(self):
        rng = np.random.default_rng(9)
        x = random_full_rank(rng, 2, 5)
        problem = RegressionProblem(x, x.entries.T @ np.array([1.0, 1.0]))
        for k in (1, 2, 3):
            assert exact_repeated_sampling_loss(problem, k) == pytest.approx(0.0, abs=1e-16)

    def test_one_plus_d_over_k(self):
        rng = np.random.default_rng(10)
        problem = RegressionProblem(X3, rng.standard_normal(3))
        best = solve_full(problem).loss
        for k in (1, 2, 3):
            out = exact_repeated_sampling_loss(problem, k)
            assert out == pytest.approx((1.0 + 2.0 / k) * best, rel=1e-10)

    def test_tuple_cap(self):
        rng = np.random.default_rng(11)
        problem = RegressionProblem(random_full_rank(rng, 2, 8), rng.standard_normal(8))
        with pytest.raises(TooManySubsetsError):
            exact_repeated_sampling_loss(problem, 3, tuple_cap=100)


class TestLayerConsistency:
    def test_three_column_instance(self):
        assert layer_consistency_check(X3, 2)

    def test_degenerate_support(self):
        x = ProblemMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        assert layer_consistency_check(x, 2)

    def test_top_level_marginalization(self):
        rng = np.random.default_rng(12)
        x = random_full_rank(rng, 3, 7)
        assert layer_consistency_check(x, 6)

    def test_all_levels_random_instance(self):
        rng = np.random.default_rng(13)
        x = random_full_rank(rng, 2, 7)
        for size in range(2, 7):
            assert layer_total_variation(x, size) <= 1e-9


class TestCaps:
    def test_enumeration_cap_propagates(self):
        rng = np.random.default_rng(14)
        x = random_full_rank(rng, 2, 10)
        with pytest.raises(TooManySubsetsError):
            exact_pinv_expectation(x, 5, cap=10)
