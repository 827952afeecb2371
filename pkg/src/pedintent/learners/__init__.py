"""Native classifiers and uniform trainer adapters.

The low-level trainers keep their natural label conventions (the SVM
wants -1/+1, the tree and kNN take class indices, the MLP takes one-hot
targets). The adapters below present one interface to the evaluation
code: a trainer is `f(X, y01) -> classifier` where y01 holds class
indices {0, 1}, index 0 being the positive / first-listed class, and
the classifier has `.predict(X) -> y01`. Each adapter fits its own
standardizer on the training data and applies it at prediction time.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .knn import KnnModel, knn_predict, knn_train
from .mlp import (MlpModel, mlp_forward, mlp_grad, mlp_init, mlp_loss,
                  mlp_predict, mlp_train, one_hot_targets)
from .scaling import Standardizer, standardize_apply, standardize_fit
from .serialize import load_model, save_model
from .svm import (SvmModel, kernel_cubic, kernel_cubic_matrix, svm_decision,
                  svm_predict, svm_train)
from .tree import TreeModel, tree_predict, tree_train

CLASSIFIER_KINDS = ("knn", "svm", "ann", "dt")


@dataclass
class Classifier:
    """A fitted model plus the preprocessing baked in at fit time."""
    kind: str
    model: object
    stats: Standardizer | None

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.stats is not None:
            X = standardize_apply(self.stats, X)
        if self.kind == "svm":
            return (svm_predict(self.model, X) < 0).astype(np.intp)
        if self.kind == "knn":
            return knn_predict(self.model, X).astype(np.intp)
        if self.kind == "ann":
            return mlp_predict(self.model, X)
        if self.kind == "dt":
            return tree_predict(self.model, X)
        raise DataError("unknown classifier kind %r" % (self.kind,))


def _check_y01(y):
    y = np.asarray(y, dtype=np.intp)
    if set(np.unique(y)) - {0, 1}:
        raise DataError("trainer labels must be class indices 0/1")
    return y


def make_trainer(kind, seed=0, epochs=200, k=1, min_leaf=1, standardize=None):
    """Trainer factory for a classifier kind.

    Standardization defaults to on for svm and ann (margin and gradient
    scales depend on it) and off for knn and dt, matching how the
    pipeline runs them; pass `standardize` to override.
    """
    if kind not in CLASSIFIER_KINDS:
        raise DataError("unknown classifier kind %r" % (kind,))
    if standardize is None:
        standardize = kind in ("svm", "ann")

    def trainer(X, y):
        X = np.asarray(X, dtype=np.float64)
        y01 = _check_y01(y)
        stats = standardize_fit(X) if standardize else None
        Xs = standardize_apply(stats, X) if standardize else X
        if kind == "svm":
            # class index 0 is the positive class
            y_pm = np.where(y01 == 0, 1.0, -1.0)
            model = svm_train(Xs, y_pm, seed=seed)
        elif kind == "knn":
            model = knn_train(Xs, y01, k=k)
        elif kind == "ann":
            model = mlp_train(Xs, one_hot_targets(y01), seed=seed, epochs=epochs)
        else:
            model = tree_train(Xs, y01, min_leaf=min_leaf)
        return Classifier(kind, model, stats)

    return trainer
