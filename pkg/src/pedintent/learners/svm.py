"""Soft-margin SVM with an inhomogeneous cubic kernel, trained by SMO.

The dual problem

    max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0

is solved by sequential minimal optimization over the maximal violating
pair: with v_t = y_t - f_t (f is the bias-free decision value), pick
i = argmax v over the up set and j = argmin v over the down set, stop
when v_i - v_j <= tol. Each two-variable subproblem is solved exactly
with box clipping. Kernel rows are produced through a small LRU cache,
so memory stays linear in n for long runs on one pass of the data.
"""

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, NumericalError

DEFAULT_C = 1.0
DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 100000
_ETA_FLOOR = 1e-12
_SNAP_REL = 1e-12


def kernel_cubic(x, z):
    """(1 + <x, z>)^3 for two vectors."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape or x.ndim != 1:
        raise DataError("kernel arguments must be equal-length vectors")
    return (1.0 + x @ z) ** 3


def kernel_cubic_matrix(A, B):
    """(1 + A B^T)^3 elementwise, shape (len(A), len(B))."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DataError("kernel operands differ in feature count")
    return (1.0 + A @ B.T) ** 3


class _RowCache:
    """LRU cache of kernel matrix rows."""

    def __init__(self, X, capacity):
        self.X = X
        self.capacity = max(2, capacity)
        self.rows = OrderedDict()

    def row(self, i):
        if i in self.rows:
            self.rows.move_to_end(i)
            return self.rows[i]
        r = (1.0 + self.X @ self.X[i]) ** 3
        self.rows[i] = r
        if len(self.rows) > self.capacity:
            self.rows.popitem(last=False)
        return r


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for the stored vectors
    bias: float
    C: float
    converged: bool
    iterations: int
    kkt_gap: float
    dual_objective: list = field(default_factory=list, repr=False)


def svm_train(X, y, C=DEFAULT_C, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
              seed=0, cache_rows=4096):
    """Train on X (n, d) with labels y in {-1, +1}.

    Deterministic: the maximal-violating-pair rule needs no randomness
    (`seed` is accepted for trainer interface uniformity). Returns the
    model with the support set, per-iteration dual objective values and
    the final KKT gap; `converged` is False when the iteration budget
    ran out, and the model is still usable.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DataError("svm_train: X and y disagree")
    if not np.isfinite(X).all():
        raise DataError("svm_train: non-finite features")
    if set(np.unique(y)) - {-1.0, 1.0}:
        raise DataError("svm_train: labels must be -1/+1")
    if len(set(np.unique(y))) < 2:
        raise DataError("svm_train: both classes required")
    if C <= 0.0:
        raise DataError("svm_train: C must be positive")

    n = X.shape[0]
    cache = _RowCache(X, cache_rows)
    alpha = np.zeros(n)
    f = np.zeros(n)  # sum_t alpha_t y_t K(x_t, .)
    pos = y > 0
    history = []
    gap = np.inf
    it = 0
    converged = False

    while it < max_iter:
        v = y - f
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        down = (~pos & (alpha < C)) | (pos & (alpha > 0))
        if not up.any() or not down.any():
            converged = True
            gap = 0.0
            break
        vu = np.where(up, v, -np.inf)
        vd = np.where(down, v, np.inf)
        i = int(np.argmax(vu))
        j = int(np.argmin(vd))
        gap = v[i] - v[j]
        if gap <= tol:
            converged = True
            break

        Ki = cache.row(i)
        Kj = cache.row(j)
        eta = Ki[i] + Kj[j] - 2.0 * Ki[j]
        if eta <= 0.0:
            eta = _ETA_FLOOR
        ai, aj = alpha[i], alpha[j]
        yi, yj = y[i], y[j]
        s = yi * yj
        if s < 0:
            L = max(0.0, aj - ai)
            H = min(C, C + aj - ai)
        else:
            L = max(0.0, ai + aj - C)
            H = min(C, ai + aj)
        # E_i - E_j = (f_i - y_i) - (f_j - y_j) = v_j - v_i
        aj_new = aj + yj * (v[j] - v[i]) / eta
        aj_new = min(H, max(L, aj_new))
        # Snap bound-dust to exact 0 or C so later [L, H] boxes cannot
        # degenerate (fl(ai + aj) == aj stalls the pair). The threshold
        # is relative to the pair's own scale: on large-kernel problems
        # legitimate alphas sit many decades below C, so an absolute
        # floor would swallow real steps.
        snap = _SNAP_REL * max(ai, aj)
        if aj_new < snap:
            aj_new = 0.0
        elif C - aj_new < snap:
            aj_new = C
        if aj_new == aj:
            # step underflowed: no representable progress on the worst pair
            break
        ai_new = ai + s * (aj - aj_new)
        snap = _SNAP_REL * max(ai, aj, aj_new)
        if ai_new < snap:
            if ai_new < -snap:
                raise NumericalError("svm_train: alpha underflow at iter %d" % it)
            ai_new = 0.0
        elif C - ai_new < snap:
            if ai_new - C > snap:
                raise NumericalError("svm_train: alpha overflow at iter %d" % it)
            ai_new = C
        f += (ai_new - ai) * yi * Ki + (aj_new - aj) * yj * Kj
        alpha[i] = ai_new
        alpha[j] = aj_new
        it += 1
        history.append(alpha.sum() - 0.5 * (alpha * y) @ f)

    if not np.isfinite(f).all():
        raise NumericalError("svm_train: decision values diverged")

    v = y - f
    free = (alpha > 0.0) & (alpha < C)
    if free.any():
        bias = float(v[free].mean())
    else:
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        down = (~pos & (alpha < C)) | (pos & (alpha > 0))
        hi = v[up].max() if up.any() else 0.0
        lo = v[down].min() if down.any() else 0.0
        bias = float((hi + lo) / 2.0)

    sv = alpha > 0.0
    return SvmModel(
        support_vectors=X[sv].copy(),
        dual_coef=(alpha * y)[sv].copy(),
        bias=bias,
        C=C,
        converged=converged,
        iterations=it,
        kkt_gap=float(gap if np.isfinite(gap) else 0.0),
        dual_objective=history,
    )


def svm_decision(model, X):
    """Decision values sum_i dual_coef_i K(sv_i, x) + bias."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.support_vectors.shape[0] == 0:
        return np.full(X.shape[0], model.bias)
    K = kernel_cubic_matrix(X, model.support_vectors)
    return K @ model.dual_coef + model.bias


def svm_predict(model, X):
    """Labels in {-1, +1}; a decision value of exactly 0 goes positive."""
    d = svm_decision(model, X)
    return np.where(d >= 0.0, 1.0, -1.0)
