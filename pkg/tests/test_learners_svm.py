import numpy as np
import pytest

from pedintent.learners import scaling, svm
from pedintent.errors import DataError


def test_kernel_matches_definition():
    rng = np.random.default_rng(0)
    x = rng.normal(size=5)
    z = rng.normal(size=5)
    assert svm.kernel_cubic(x, z) == pytest.approx((1.0 + x @ z) ** 3,
                                                   rel=1e-12)


def test_kernel_matrix_matches_pairwise():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(6, 3))
    b = rng.normal(size=(4, 3))
    km = svm.kernel_cubic_matrix(a, b)
    for i in range(6):
        for j in range(4):
            assert km[i, j] == pytest.approx(svm.kernel_cubic(a[i], b[j]),
                                             rel=1e-12)


def _blobs(n_per, seed, spread=0.6, sep=2.0):
    rng = np.random.default_rng(seed)
    pos = rng.normal(loc=(+sep, +sep), scale=spread, size=(n_per, 2))
    neg = rng.normal(loc=(-sep, -sep), scale=spread, size=(n_per, 2))
    x = np.vstack([pos, neg])
    y = np.concatenate([np.ones(n_per), -np.ones(n_per)])
    return x, y


def _full_alpha(model, x_train, y_train):
    """Recover the full alpha vector by matching support rows to training rows."""
    alpha = np.zeros(len(x_train))
    used = np.zeros(len(x_train), dtype=bool)
    for sv, coef in zip(model.support_vectors, model.dual_coef):
        hits = np.where(~used & np.all(x_train == sv, axis=1))[0]
        assert hits.size > 0, "support vector not found in training set"
        i = hits[0]
        used[i] = True
        alpha[i] = coef * y_train[i]  # dual_coef = alpha * y
    assert np.all(alpha >= -1e-12)
    return alpha


def test_blobs_separable_kkt_and_dual():
    x, y = _blobs(30, seed=2)
    model = svm.svm_train(x, y, C=1.0, tol=1e-3, seed=0)
    assert model.converged
    assert model.kkt_gap <= 1e-3

    pred = svm.svm_predict(model, x)
    assert np.all(pred == y)

    alpha = _full_alpha(model, x, y)
    assert abs(np.dot(alpha, y)) <= 1e-8
    assert np.all(alpha <= 1.0 + 1e-10)

    # independent KKT check: r_i = y_i f(x_i), complementary slackness bands
    k = svm.kernel_cubic_matrix(x, x)
    f = k @ (alpha * y) + model.bias
    r = y * f
    free = (alpha > 1e-8) & (alpha < 1.0 - 1e-8)
    assert np.all(np.abs(r[free] - 1.0) <= 2e-3)
    assert np.all(r[alpha <= 1e-8] >= 1.0 - 2e-3)
    assert np.all(r[alpha >= 1.0 - 1e-8] <= 1.0 + 2e-3)

    hist = np.asarray(model.dual_objective)
    assert hist.size >= 1
    assert np.all(np.diff(hist) >= -1e-9)


def test_xor_is_separated_by_cubic_kernel():
    x = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([1.0, 1.0, -1.0, -1.0])
    stats = scaling.standardize_fit(x)
    xs = scaling.standardize_apply(stats, x)
    model = svm.svm_train(xs, y, C=1.0, tol=1e-3, seed=0)
    assert np.all(svm.svm_predict(model, xs) == y)


def test_decision_function_from_model_parts():
    x, y = _blobs(15, seed=3)
    model = svm.svm_train(x, y)
    q = np.random.default_rng(4).normal(size=(7, 2))
    expect = (svm.kernel_cubic_matrix(q, model.support_vectors)
              @ model.dual_coef + model.bias)
    assert np.allclose(svm.svm_decision(model, q), expect, rtol=0, atol=1e-12)


def test_tie_predicts_positive():
    # model with no support vectors and bias 0 gives decision exactly 0
    model = svm.SvmModel(
        support_vectors=np.zeros((0, 2)), dual_coef=np.zeros(0), bias=0.0,
        C=1.0, converged=True, iterations=0, kkt_gap=0.0)
    q = np.random.default_rng(5).normal(size=(4, 2))
    assert np.array_equal(svm.svm_decision(model, q), np.zeros(4))
    assert np.array_equal(svm.svm_predict(model, q), np.ones(4))


def test_overlapping_blobs_box_constraint_active():
    x, y = _blobs(40, seed=6, spread=2.5, sep=0.7)
    stats = scaling.standardize_fit(x)
    x = scaling.standardize_apply(stats, x)
    model = svm.svm_train(x, y, C=1.0)
    assert model.converged
    alpha = _full_alpha(model, x, y)
    assert np.any(alpha >= 1.0 - 1e-8)  # overlap drives some alphas to the box
    assert abs(np.dot(alpha, y)) <= 1e-8
    hist = np.asarray(model.dual_objective)
    assert np.all(np.diff(hist) >= -1e-9)


def test_input_validation():
    x = np.zeros((4, 2))
    with pytest.raises(DataError):
        svm.svm_train(x, np.array([1.0, 1.0, 1.0, 1.0]))  # one class
    with pytest.raises(DataError):
        svm.svm_train(x, np.array([1.0, -1.0, 2.0, -1.0]))  # bad label
    with pytest.raises(DataError):
        svm.svm_train(x, np.array([1.0, -1.0]))  # length mismatch


def test_cache_size_does_not_change_result():
    x, y = _blobs(25, seed=7)
    a = svm.svm_train(x, y, cache_rows=2)
    b = svm.svm_train(x, y, cache_rows=256)
    assert np.array_equal(a.support_vectors, b.support_vectors)
    assert np.array_equal(a.dual_coef, b.dual_coef)
    assert a.bias == b.bias
    assert a.iterations == b.iterations


def test_deterministic_across_runs():
    x, y = _blobs(20, seed=8)
    a = svm.svm_train(x, y)
    b = svm.svm_train(x, y)
    assert np.array_equal(a.dual_coef, b.dual_coef)
    assert a.bias == b.bias
    assert a.dual_objective == b.dual_objective
