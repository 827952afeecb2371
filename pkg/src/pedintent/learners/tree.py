"""Binary CART classifier with Gini impurity, no pruning.

Candidate thresholds are midpoints of consecutive distinct sorted feature
values; a point goes left when x[feature] <= threshold. The best split
maximizes the impurity decrease; equal gains resolve to the lower feature
index, then the lower threshold. A node splits whenever any candidate
keeps both sides at min_leaf or more, even at zero gain, so training
always reaches pure leaves on consistent data. Leaves predict their
majority class (ties to the lower class index) and carry their purity.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError

LEAF = -1


@dataclass(frozen=True)
class TreeNode:
    """Internal: feature >= 0, threshold, child indices. Leaf: feature
    LEAF, class label and purity (majority fraction)."""
    feature: int
    threshold: float
    left: int
    right: int
    label: int
    purity: float


@dataclass
class TreeModel:
    nodes: list
    n_features: int


def _gini(counts):
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float(p @ p)


def _best_split(X, y, n_classes, min_leaf):
    """(feature, threshold, gain) maximizing impurity decrease, or None."""
    n = y.size
    parent_counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    parent_gini = _gini(parent_counts)
    best = None
    for feat in range(X.shape[1]):
        col = X[:, feat]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        ys = y[order]
        # boundaries between distinct consecutive values
        cuts = np.nonzero(xs[1:] != xs[:-1])[0]
        if cuts.size == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1.0
        prefix = np.cumsum(onehot, axis=0)
        left_counts = prefix[cuts]
        right_counts = parent_counts - left_counts
        n_left = left_counts.sum(axis=1)
        n_right = n - n_left
        ok = (n_left >= min_leaf) & (n_right >= min_leaf)
        if not ok.any():
            continue
        p_left = left_counts / n_left[:, None]
        p_right = right_counts / np.maximum(n_right, 1.0)[:, None]
        child = (n_left * (1.0 - np.einsum("ij,ij->i", p_left, p_left))
                 + n_right * (1.0 - np.einsum("ij,ij->i", p_right, p_right))) / n
        gains = parent_gini - child
        gains[~ok] = -np.inf
        k = int(np.argmax(gains))  # first max: lower threshold wins ties
        gain = float(gains[k])
        if gain == -np.inf:
            continue
        thr = (xs[cuts[k]] + xs[cuts[k] + 1]) / 2.0
        if best is None or gain > best[2]:  # strict: lower feature wins ties
            best = (feat, thr, gain)
    return best


def tree_train(X, y, min_leaf=1, n_classes=2):
    """Grow a tree on X (n, d) and integer class labels y in {0..k-1}."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if X.ndim != 2 or X.shape[0] != y.size or y.size == 0:
        raise DataError("tree_train: X and y disagree")
    if y.min() < 0 or y.max() >= n_classes:
        raise DataError("tree_train: class index out of range")
    if min_leaf < 1:
        raise DataError("tree_train: min_leaf must be >= 1")
    nodes = []

    def leaf(idx):
        counts = np.bincount(y[idx], minlength=n_classes)
        label = int(np.argmax(counts))  # first max: lower class on ties
        purity = float(counts[label] / idx.size)
        nodes.append(TreeNode(LEAF, 0.0, -1, -1, label, purity))
        return len(nodes) - 1

    def build(idx):
        sub_y = y[idx]
        if np.all(sub_y == sub_y[0]) or idx.size < 2 * min_leaf:
            return leaf(idx)
        split = _best_split(X[idx], sub_y, n_classes, min_leaf)
        if split is None:
            return leaf(idx)
        feat, thr, _ = split
        mask = X[idx, feat] <= thr
        me = len(nodes)
        nodes.append(None)  # reserve slot so children index after parent
        left = build(idx[mask])
        right = build(idx[~mask])
        nodes[me] = TreeNode(feat, thr, left, right, -1, 0.0)
        return me

    build(np.arange(y.size))
    return TreeModel(nodes, X.shape[1])


def tree_predict(model, X):
    """Class labels for X (m, d)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise DataError("tree_predict: feature count mismatch")
    out = np.empty(X.shape[0], dtype=np.intp)
    for r in range(X.shape[0]):
        node = model.nodes[0]
        while node.feature != LEAF:
            node = model.nodes[node.left if X[r, node.feature] <= node.threshold
                               else node.right]
        out[r] = node.label
    return out
