"""Per-feature standardization with training statistics only."""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray
    zero_variance: np.ndarray  # bool mask of degenerate features


def standardize_fit(X):
    """Column means and population standard deviations (ddof = 0).

    Columns whose spread is at rounding-noise level relative to their
    mean are flagged zero-variance; standardize_apply sends them to 0.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise DataError("standardize_fit needs a non-empty 2-d matrix")
    if not np.isfinite(X).all():
        raise DataError("standardize_fit: non-finite input")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    zero = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    return Standardizer(mean, std, zero)


def standardize_apply(stats, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != stats.mean.size:
        raise DataError(
            "standardize_apply: %d features, statistics for %d"
            % (X.shape[1], stats.mean.size)
        )
    safe = np.where(stats.zero_variance, 1.0, stats.std)
    Z = (X - stats.mean) / safe
    Z[:, stats.zero_variance] = 0.0
    return Z
