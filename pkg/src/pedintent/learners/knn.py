"""Nearest-neighbor classifier, Euclidean metric, default k = 1."""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError


@dataclass
class KnnModel:
    points: np.ndarray
    labels: np.ndarray
    k: int = 1


def knn_train(X, y, k=1):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or y.size == 0:
        raise DataError("knn_train: X and y disagree")
    if not 1 <= k <= X.shape[0]:
        raise DataError("knn_train: k out of range")
    return KnnModel(X.copy(), y.copy(), k)


def knn_predict(model, X, chunk=256):
    """Majority label of the k nearest points; with k = 1 this is the
    label of the single closest point. Distance ties resolve to the
    lowest training index (argmin/argsort order)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.points.shape[1]:
        raise DataError("knn_predict: feature count mismatch")
    out = np.empty(X.shape[0], dtype=model.labels.dtype)
    sq_train = np.einsum("ij,ij->i", model.points, model.points)
    for lo in range(0, X.shape[0], chunk):
        Q = X[lo:lo + chunk]
        d2 = sq_train[None, :] - 2.0 * (Q @ model.points.T)
        # squared query norms cancel in the comparison and are omitted
        if model.k == 1:
            nearest = np.argmin(d2, axis=1)
            out[lo:lo + chunk] = model.labels[nearest]
        else:
            part = np.argsort(d2, axis=1, kind="stable")[:, :model.k]
            for r in range(part.shape[0]):
                votes = model.labels[part[r]]
                values, counts = np.unique(votes, return_counts=True)
                out[lo + r] = values[np.argmax(counts)]
    return out
