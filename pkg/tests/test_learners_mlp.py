import numpy as np
import pytest

from pedintent.learners import mlp
from pedintent.errors import DataError, NumericalError


def _flatten(model):
    return np.concatenate([model.W1.ravel(), model.b1, model.W2.ravel(),
                           model.b2])


def _rebuild(model, theta):
    n_in, n_hid, n_out = model.n_inputs, model.n_hidden, model.n_outputs
    k = 0
    w1 = theta[k:k + n_in * n_hid].reshape(n_hid, n_in); k += n_in * n_hid
    b1 = theta[k:k + n_hid]; k += n_hid
    w2 = theta[k:k + n_hid * n_out].reshape(n_out, n_hid); k += n_hid * n_out
    b2 = theta[k:k + n_out]
    return mlp.MlpModel(W1=w1, b1=b1, W2=w2, b2=b2)


def _numeric_grad(model, x, t, h=1e-5):
    theta = _flatten(model)
    grad = np.zeros_like(theta)
    for p in range(theta.size):
        bump = np.zeros_like(theta)
        bump[p] = h
        up = mlp.mlp_loss(_rebuild(model, theta + bump), x, t)
        dn = mlp.mlp_loss(_rebuild(model, theta - bump), x, t)
        grad[p] = (up - dn) / (2.0 * h)
    return grad


def _rel_err(a, b):
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return np.linalg.norm(a - b) / denom


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    for n_in, n_hid, n_out in [(3, 10, 2), (5, 4, 2), (2, 7, 3)]:
        model = mlp.mlp_init(n_in, n_hid, n_out, seed=int(rng.integers(1000)))
        x = rng.normal(size=(6, n_in))
        t = rng.uniform(-1, 1, size=(6, n_out))
        g = mlp.mlp_grad(model, x, t)
        analytic = np.concatenate([g[0].ravel(), g[1], g[2].ravel(), g[3]])
        assert _rel_err(analytic, _numeric_grad(model, x, t)) < 1e-5


def test_forward_shapes_and_tanh_range():
    model = mlp.mlp_init(4, 10, 2, seed=1)
    x = np.random.default_rng(2).normal(size=(12, 4))
    a1, out = mlp.mlp_forward(model, x)
    assert a1.shape == (12, 10)
    assert out.shape == (12, 2)
    assert np.all(np.abs(out) < 1.0) and np.all(np.abs(a1) < 1.0)


def test_loss_is_mean_over_all_entries():
    # zero weights force every output to tanh(0) = 0
    model = mlp.MlpModel(W1=np.zeros((3, 2)), b1=np.zeros(3),
                         W2=np.zeros((2, 3)), b2=np.zeros(2))
    x = np.ones((2, 2))
    t = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert mlp.mlp_loss(model, x, t) == pytest.approx(0.5)  # mean of 1,0,0,1
    t2 = np.array([[1.0, 1.0], [1.0, 1.0]])
    assert mlp.mlp_loss(model, x, t2) == pytest.approx(1.0)


def test_init_reproducible_and_in_range():
    a = mlp.mlp_init(3, 10, 2, seed=7)
    b = mlp.mlp_init(3, 10, 2, seed=7)
    assert np.array_equal(a.W1, b.W1) and np.array_equal(a.b2, b.b2)
    for arr in (a.W1, a.b1, a.W2, a.b2):
        assert np.all(arr >= -0.5) and np.all(arr < 0.5)
    c = mlp.mlp_init(3, 10, 2, seed=8)
    assert not np.array_equal(a.W1, c.W1)


def test_one_hot_targets():
    t = mlp.one_hot_targets(np.array([0, 1, 1, 0]), 2)
    assert np.array_equal(t, np.array([[1.0, 0.0], [0.0, 1.0],
                                       [0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(DataError):
        mlp.one_hot_targets(np.array([0, 2]), 2)


def test_training_loss_never_increases():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(30, 4))
    y = (x[:, 0] + x[:, 1] > 0).astype(int)
    t = mlp.one_hot_targets(y, 2)
    model = mlp.mlp_train(x, t, n_hidden=10, epochs=60, seed=0)
    hist = np.asarray(model.loss_history)
    assert hist.size >= 2
    assert np.all(np.diff(hist) <= 1e-12)
    assert hist[-1] < hist[0]


def test_trains_linearly_separable_problem():
    rng = np.random.default_rng(4)
    x = np.vstack([rng.normal(loc=(2, 2), size=(25, 2)),
                   rng.normal(loc=(-2, -2), size=(25, 2))])
    y = np.array([0] * 25 + [1] * 25)
    model = mlp.mlp_train(x, mlp.one_hot_targets(y, 2), n_hidden=10,
                          epochs=200, seed=0)
    pred = mlp.mlp_predict(model, x)
    assert np.mean(pred == y) >= 0.98


def test_predict_tie_prefers_lower_index():
    model = mlp.MlpModel(W1=np.zeros((3, 2)), b1=np.zeros(3),
                         W2=np.zeros((2, 3)), b2=np.zeros(2))
    # all-zero weights give identical outputs for both classes
    pred = mlp.mlp_predict(model, np.ones((5, 2)))
    assert np.array_equal(pred, np.zeros(5, dtype=pred.dtype))


def test_validation_errors():
    x = np.zeros((4, 3))
    with pytest.raises(DataError):
        mlp.mlp_train(x, np.zeros((3, 2)), n_hidden=5, epochs=1, seed=0)
    with pytest.raises(DataError):
        mlp.mlp_train(x, np.zeros((4, 2)), n_hidden=0, epochs=1, seed=0)
    with pytest.raises((DataError, NumericalError)):
        bad = x.copy()
        bad[0, 0] = np.nan
        mlp.mlp_train(bad, np.zeros((4, 2)), n_hidden=5, epochs=2, seed=0)


def test_deterministic_training():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(20, 3))
    t = mlp.one_hot_targets((x[:, 0] > 0).astype(int), 2)
    a = mlp.mlp_train(x, t, n_hidden=10, epochs=30, seed=11)
    b = mlp.mlp_train(x, t, n_hidden=10, epochs=30, seed=11)
    assert np.array_equal(a.W1, b.W1) and np.array_equal(a.W2, b.W2)
    assert a.loss_history == b.loss_history
