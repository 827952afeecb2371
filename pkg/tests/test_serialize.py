import numpy as np
import pytest

from pedintent.learners import knn, mlp, scaling, serialize, svm, tree
from pedintent.errors import DataError


def _svm_model():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(loc=2, size=(12, 3)),
                   rng.normal(loc=-2, size=(12, 3))])
    y = np.concatenate([np.ones(12), -np.ones(12)])
    return svm.svm_train(x, y), x


def test_svm_roundtrip(tmp_path):
    model, x = _svm_model()
    path = str(tmp_path / "m.psvm")
    serialize.save_model(model, path)
    back = serialize.load_model(path)
    assert np.array_equal(back.support_vectors, model.support_vectors)
    assert np.array_equal(back.dual_coef, model.dual_coef)
    assert back.bias == model.bias
    assert back.C == model.C
    assert back.converged == model.converged
    assert back.iterations == model.iterations
    assert back.kkt_gap == model.kkt_gap
    assert np.array_equal(svm.svm_decision(back, x), svm.svm_decision(model, x))


def test_svm_history_not_persisted(tmp_path):
    model, _ = _svm_model()
    assert len(model.dual_objective) > 0
    path = str(tmp_path / "m.psvm")
    serialize.save_model(model, path)
    assert serialize.load_model(path).dual_objective == []


def test_knn_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    model = knn.knn_train(rng.normal(size=(9, 4)),
                          rng.integers(0, 2, size=9), k=3)
    path = str(tmp_path / "m.pknn")
    serialize.save_model(model, path)
    back = serialize.load_model(path)
    assert np.array_equal(back.points, model.points)
    assert np.array_equal(back.labels, model.labels)
    assert back.k == model.k
    q = rng.normal(size=(5, 4))
    assert np.array_equal(knn.knn_predict(back, q), knn.knn_predict(model, q))


def test_mlp_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    x = rng.normal(size=(15, 3))
    t = mlp.one_hot_targets((x[:, 0] > 0).astype(int), 2)
    model = mlp.mlp_train(x, t, epochs=10, seed=0)
    path = str(tmp_path / "m.pmlp")
    serialize.save_model(model, path)
    back = serialize.load_model(path)
    for name in ("W1", "b1", "W2", "b2"):
        assert np.array_equal(getattr(back, name), getattr(model, name))
    assert back.loss_history == []
    assert np.array_equal(mlp.mlp_predict(back, x), mlp.mlp_predict(model, x))


def test_tree_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    x = rng.normal(size=(40, 3))
    y = rng.integers(0, 2, size=40)
    model = tree.tree_train(x, y)
    path = str(tmp_path / "m.ptre")
    serialize.save_model(model, path)
    back = serialize.load_model(path)
    assert back.nodes == model.nodes
    assert back.n_features == model.n_features
    assert np.array_equal(tree.tree_predict(back, x), tree.tree_predict(model, x))


def test_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"XXXX" + b"\x00" * 64)
    with pytest.raises(DataError, match="magic"):
        serialize.load_model(str(path))


def test_rejects_bad_version(tmp_path):
    model, _ = _svm_model()
    path = tmp_path / "m.psvm"
    serialize.save_model(model, str(path))
    raw = bytearray(path.read_bytes())
    raw[4:8] = (99).to_bytes(4, "little")
    path.write_bytes(bytes(raw))
    with pytest.raises(DataError, match="version"):
        serialize.load_model(str(path))


def test_rejects_truncated_and_trailing(tmp_path):
    model, _ = _svm_model()
    path = tmp_path / "m.psvm"
    serialize.save_model(model, str(path))
    raw = path.read_bytes()
    path.write_bytes(raw[:-3])
    with pytest.raises(DataError):
        serialize.load_model(str(path))
    path.write_bytes(raw + b"\x00")
    with pytest.raises(DataError):
        serialize.load_model(str(path))


def test_save_rejects_unknown_object(tmp_path):
    with pytest.raises(DataError):
        serialize.save_model(object(), str(tmp_path / "x.bin"))


# --- standardizer ---


def test_standardize_zero_mean_unit_std():
    rng = np.random.default_rng(4)
    x = rng.normal(loc=3.0, scale=2.0, size=(200, 5))
    stats = scaling.standardize_fit(x)
    z = scaling.standardize_apply(stats, x)
    assert np.allclose(z.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(z.std(axis=0), 1.0, atol=1e-12)  # population std


def test_standardize_constant_column_to_zero():
    x = np.column_stack([np.full(50, 0.1), np.arange(50.0)])
    stats = scaling.standardize_fit(x)
    assert stats.zero_variance[0] and not stats.zero_variance[1]
    z = scaling.standardize_apply(stats, x)
    assert np.all(z[:, 0] == 0.0)
    assert np.isfinite(z).all()


def test_standardize_apply_new_data_uses_train_stats():
    x = np.array([[0.0], [2.0]])
    stats = scaling.standardize_fit(x)  # mean 1, std 1
    z = scaling.standardize_apply(stats, np.array([[3.0]]))
    assert z[0, 0] == pytest.approx(2.0)
