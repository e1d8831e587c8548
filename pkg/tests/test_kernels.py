import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from midfuse.errors import DimensionMismatch, IllPosedCoupling, PartitionMismatch
from midfuse.kernels import (KernelModel, MVKernelModel, lssvm_predict, lssvm_raw, mv_lssvm_predict,
                             mv_view_scores, rbf_gram, sign, train_lssvm, train_mv_lssvm, train_mv_lssvm_grams)
from midfuse.views import ViewPartition, random_partition, split_by_partition

from oracles import lssvm_residual, mv_lssvm_residual


def toy(rng, n, d):
    X = rng.standard_normal((n, d))
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return X, y


def test_rbf_examples():
    assert rbf_gram(np.ones((1, 3)), np.ones((1, 3)))[0, 0] == 1.0
    val = rbf_gram(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]), gamma=1.0)[0, 0]
    assert val == pytest.approx(np.exp(-2.0), rel=1e-15)
    X = np.random.default_rng(0).standard_normal((4, 8))
    np.testing.assert_allclose(rbf_gram(X), rbf_gram(X, X.copy(), gamma=1 / 8), atol=1e-15)
    with pytest.raises(DimensionMismatch):
        rbf_gram(X, np.ones((2, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(1, 20), st.floats(1e-3, 10), st.integers(0, 1000))
def test_gram_properties(n, p, gamma, seed):
    X = np.random.default_rng(seed).standard_normal((n, p))
    K = rbf_gram(X, None, gamma)
    assert np.array_equal(K, K.T)
    assert np.all(np.diag(K) == 1.0)
    assert np.all((K > 0) | (K == 0)) and np.all(K <= 1.0)


def test_two_point_solution():
    # hand-solved: b = 0 and alpha_k (1 + 1/gamma) = 1, so alpha = (0.5, 0.5) for gamma = 1
    model = train_lssvm(np.eye(2), np.array([1.0, -1.0]), 1.0)
    np.testing.assert_allclose(model.alpha, [0.5, 0.5], atol=1e-15)
    assert model.b == pytest.approx(0.0, abs=1e-15)
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    m = train_lssvm(rbf_gram(X, None, 1.0), np.array([1.0, -1.0]), 1.0, support_X=X, kernel_gamma=1.0)
    assert lssvm_raw(m, np.zeros((1, 2)))[0] == pytest.approx(0.0, abs=1e-14)


def test_bias_only_model():
    m = KernelModel(np.zeros(3), 0.7, 1.0, np.array([1.0, -1, 1]), np.eye(3), 1.0)
    np.testing.assert_allclose(lssvm_raw(m, np.random.default_rng(0).standard_normal((5, 3))), 0.7)


def test_separable_toy():
    X = np.array([[0.0, 0.0], [0.2, 0.1], [3.0, 3.0], [3.1, 2.9]])
    y = np.array([1.0, 1.0, -1.0, -1.0])
    m = train_lssvm(rbf_gram(X, None, 1.0), y, 100.0, support_X=X, kernel_gamma=1.0)
    np.testing.assert_array_equal(lssvm_predict(m, X), y)
    assert abs(y @ m.alpha) < 1e-10


def test_sign_convention():
    np.testing.assert_array_equal(sign([-0.1, 0.0, 2.0]), [-1, 1, 1])


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 60), st.floats(1e-2, 1e3), st.integers(0, 10_000))
def test_lssvm_kkt_rowwise(n, gamma_reg, seed):
    X, y = toy(np.random.default_rng(seed), n, 5)
    K = rbf_gram(X)
    m = train_lssvm(K, y, gamma_reg)
    assert lssvm_residual(K, y, gamma_reg, m.alpha, m.b) <= 1e-8


def test_prediction_invariant_to_sample_order():
    rng = np.random.default_rng(4)
    X, y = toy(rng, 30, 4)
    Xn = rng.standard_normal((10, 4))
    a = lssvm_raw(train_lssvm(rbf_gram(X), y, 5.0, support_X=X), Xn)
    perm = rng.permutation(30)
    b = lssvm_raw(train_lssvm(rbf_gram(X[perm]), y[perm], 5.0, support_X=X[perm]), Xn)
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_mv_rho_zero_decouples():
    rng = np.random.default_rng(7)
    X, y = toy(rng, 40, 9)
    part = random_partition(9, 3, 1)
    mv = split_by_partition(X, part)
    gammas = [0.5, 3.0, 40.0]
    model = train_mv_lssvm(mv, y, gammas, 0.0)
    for v, Xv in enumerate(mv.views):
        single = train_lssvm(rbf_gram(Xv), y, gammas[v])
        np.testing.assert_allclose(model.alphas[v], single.alpha, atol=1e-8)
        assert model.bs[v] == pytest.approx(single.b, abs=1e-8)


def test_mv_identical_views_symmetric():
    rng = np.random.default_rng(8)
    X, y = toy(rng, 25, 4)
    K = rbf_gram(X)
    m = train_mv_lssvm_grams([K, K], y, [2.0, 2.0], 0.7)
    np.testing.assert_allclose(m.alphas[0], m.alphas[1], atol=1e-10)
    assert m.bs[0] == pytest.approx(m.bs[1], abs=1e-10)


def test_mv_three_point_toy_residual():
    X = np.array([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]])
    y = np.array([1.0, 1.0, -1.0])
    grams = [rbf_gram(X[:, :1]), rbf_gram(X[:, 1:])]
    m = train_mv_lssvm_grams(grams, y, [1.0, 1.0], 0.1)
    assert mv_lssvm_residual(grams, y, [1.0, 1.0], 0.1, m.alphas, m.bs) < 1e-8


def test_mv_identical_views_rho_zero_matches_single_view():
    rng = np.random.default_rng(9)
    X, y = toy(rng, 30, 3)
    Xn = rng.standard_normal((12, 3))
    part = ViewPartition(((0, 1, 2),))
    single = train_lssvm(rbf_gram(X), y, 4.0, support_X=X)
    # duplicate the feature block so both views see the same data
    Xd, Xnd = np.hstack([X, X]), np.hstack([Xn, Xn])
    part2 = ViewPartition(((0, 1, 2), (3, 4, 5)))
    m = train_mv_lssvm(split_by_partition(Xd, part2), y, [4.0, 4.0], 0.0)
    np.testing.assert_array_equal(mv_lssvm_predict(m, split_by_partition(Xnd, part2)), lssvm_predict(single, Xn))
    assert part.n_views == 1


def test_mv_sum_rule_and_tie():
    part = ViewPartition(((0,), (1,)))
    m = MVKernelModel([np.zeros(1), np.zeros(1)], [2.0, -0.5], [1.0, 1.0], 0.0, np.ones(1), part,
                      [np.zeros((1, 1)), np.zeros((1, 1))], [1.0, 1.0])
    new = split_by_partition(np.zeros((1, 2)), part)
    assert mv_lssvm_predict(m, new)[0] == 1
    m.bs = [-1.0, 1.0]
    assert mv_lssvm_predict(m, new)[0] == 1


def test_mv_guards():
    K = np.eye(3)
    y = np.array([1.0, -1.0, 1.0])
    with pytest.raises(IllPosedCoupling):
        train_mv_lssvm_grams([K, K, K], y, [1.0, 1.0, 1.0], 0.5)
    part = ViewPartition(((0,), (1,)))
    m = train_mv_lssvm(split_by_partition(np.random.default_rng(0).standard_normal((3, 2)), part), y,
                       [1.0, 1.0], 0.1)
    other = split_by_partition(np.zeros((2, 2)), ViewPartition(((0, 1),)))
    with pytest.raises(PartitionMismatch):
        mv_view_scores(m, other)


def test_model_json_round_trip():
    rng = np.random.default_rng(10)
    X, y = toy(rng, 12, 4)
    Xn = rng.standard_normal((3, 4))
    m = train_lssvm(rbf_gram(X), y, 2.0, support_X=X, kernel_gamma=0.25)
    m2 = KernelModel.from_dict(json.loads(json.dumps(m.to_dict())))
    np.testing.assert_array_equal(lssvm_raw(m, Xn), lssvm_raw(m2, Xn))
    part = random_partition(4, 2, 0)
    mv = train_mv_lssvm(split_by_partition(X, part), y, [1.0, 2.0], 0.3)
    mv2 = MVKernelModel.from_dict(json.loads(json.dumps(mv.to_dict())))
    new = split_by_partition(Xn, part)
    np.testing.assert_array_equal(mv_view_scores(mv, new), mv_view_scores(mv2, new))
