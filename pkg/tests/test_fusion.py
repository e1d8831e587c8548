import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from midfuse.errors import SingularMatrix
from midfuse.fusion import (FusionWeights, align_and_vote, align_binary_assignments, error_covariance, fuse_scores,
                            majority_vote, performance_weights, weighted_scores)


def test_error_covariance_examples():
    y = np.array([1.0, -1.0, 1.0])
    np.testing.assert_array_equal(error_covariance(np.column_stack([y, y]), y), np.zeros((2, 2)))
    np.testing.assert_allclose(error_covariance(np.array([[1.0], [-1.0]]), np.zeros(2)), [[1.0]])
    P = np.array([[1.0, 1.0], [1.0, -1.0]])
    np.testing.assert_allclose(error_covariance(P, np.zeros(2)), np.eye(2))


def test_performance_weight_examples():
    for V in (1, 2, 5):
        np.testing.assert_allclose(performance_weights(np.eye(V)).beta, [1 / V] * V)
    np.testing.assert_allclose(performance_weights(np.diag([1.0, 3.0])).beta, [0.75, 0.25])
    e = np.array([1.0, -1.0, 0.5])
    with pytest.raises(SingularMatrix):
        performance_weights(error_covariance(np.column_stack([e, e]), np.zeros(3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10_000), st.floats(1e-3, 1e3))
def test_performance_weights_properties(V, seed, c):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((V + 3, V))
    C = M.T @ M + 0.1 * np.eye(V)
    w = performance_weights(C)
    assert abs(sum(w.beta) - 1.0) <= 1e-10
    # scale cancels for multiples of the identity
    np.testing.assert_allclose(performance_weights(c * np.eye(V)).beta, [1 / V] * V, rtol=1e-12)


def test_fuse_examples():
    half = FusionWeights((0.5, 0.5))
    assert fuse_scores(np.array([[0.9, 0.1]]), half, "prob")[0] == 1
    S = np.array([[0.3, 9.0], [-2.0, 1.0]])
    np.testing.assert_array_equal(weighted_scores(S, FusionWeights((1.0, 0.0))), S[:, 0])
    assert fuse_scores(np.array([[2.0, -1.0]]), FusionWeights((1 / 3, 2 / 3)), "sign")[0] == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 20), st.integers(0, 10_000))
def test_uniform_fusion_is_mean(V, M, seed):
    S = np.random.default_rng(seed).standard_normal((M, V))
    np.testing.assert_allclose(weighted_scores(S, FusionWeights.average(V)), S.mean(axis=1), atol=1e-14)


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        FusionWeights((0.5, 0.6))


def test_alignment_examples():
    np.testing.assert_array_equal(align_binary_assignments([0, 0, 1, 1], [1, 1, 0, 0]), [0, 0, 1, 1])
    np.testing.assert_array_equal(align_binary_assignments([0, 1, 1], [0, 1, 1]), [0, 1, 1])
    np.testing.assert_array_equal(align_binary_assignments([0, 1], [0, 0]), [0, 0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.integers(0, 10_000))
def test_alignment_distance_bound(ref, seed):
    ref = np.array(ref)
    other = np.random.default_rng(seed).integers(0, 2, ref.size)
    aligned = align_binary_assignments(ref, other)
    assert np.abs(aligned - ref).sum() <= ref.size // 2


def test_majority_vote_examples():
    assert majority_vote([[0, 0, 1]])[0] == 0
    np.testing.assert_array_equal(majority_vote([[1, 1, 1], [0, 0, 0]]), [1, 0])
    assert majority_vote([[0, 1]])[0] == 0


def test_align_and_vote_handles_label_swaps():
    truth = np.array([0, 0, 0, 1, 1, 1])
    votes = np.column_stack([truth, 1 - truth, truth])
    votes[0, 2] = 1
    np.testing.assert_array_equal(align_and_vote(votes), truth)
