"""CART-style trees shared by the forest (Gini) and boosting (SSE) models.

Split search sorts each candidate column once and scans boundaries between
distinct values with cumulative sums. Nodes are built iteratively, so trees
grown to purity cannot hit the recursion limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: np.ndarray | float | None = None     # leaf payload

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _best_gini_split(col: np.ndarray, y: np.ndarray, n_classes: int):
    """Lowest weighted child Gini over boundaries; None if column is constant."""
    order = np.argsort(col, kind="stable")
    sc = col[order]
    sy = y[order]
    n = len(sy)
    valid = sc[:-1] < sc[1:]
    if not valid.any():
        return None
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), sy] = 1.0
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]

    positions = np.flatnonzero(valid)            # left side = sorted[0..i]
    nl = (positions + 1).astype(float)
    nr = n - nl
    cl = cum[positions]
    cr = total - cl
    gini_l = 1.0 - (cl * cl).sum(axis=1) / (nl * nl)
    gini_r = 1.0 - (cr * cr).sum(axis=1) / (nr * nr)
    weighted = (nl * gini_l + nr * gini_r) / n
    best = int(np.argmin(weighted))
    i = positions[best]
    return float(weighted[best]), 0.5 * (sc[i] + sc[i + 1])


def _best_sse_split(col: np.ndarray, target: np.ndarray):
    """Lowest total child SSE over boundaries; None if column is constant."""
    order = np.argsort(col, kind="stable")
    sc = col[order]
    st = target[order]
    n = len(st)
    valid = sc[:-1] < sc[1:]
    if not valid.any():
        return None
    cum_s = np.cumsum(st)
    cum_s2 = np.cumsum(st * st)
    positions = np.flatnonzero(valid)
    nl = (positions + 1).astype(float)
    nr = n - nl
    sl = cum_s[positions]
    s2l = cum_s2[positions]
    sr = cum_s[-1] - sl
    s2r = cum_s2[-1] - s2l
    sse = (s2l - sl * sl / nl) + (s2r - sr * sr / nr)
    best = int(np.argmin(sse))
    i = positions[best]
    return float(sse[best]), 0.5 * (sc[i] + sc[i + 1])


def build_classification_tree(X: np.ndarray, y: np.ndarray, n_classes: int,
                              rng: np.random.Generator | None = None,
                              max_features: int | None = None,
                              max_depth: int | None = None) -> TreeNode:
    """Gini tree over integer class labels, grown to purity by default.

    ``max_features`` draws that many candidate columns per split (forest
    style); None scans every column. A node whose candidate columns are all
    constant becomes a leaf even if impure.
    """
    n, d = X.shape
    root = TreeNode()
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = np.bincount(y[idx], minlength=n_classes).astype(float)
        if ((counts > 0).sum() <= 1 or len(idx) < 2
                or (max_depth is not None and depth >= max_depth)):
            node.value = counts
            continue
        if max_features is not None and max_features < d:
            candidates = rng.choice(d, size=max_features, replace=False)
        else:
            candidates = np.arange(d)
        best = None
        for f in candidates:
            found = _best_gini_split(X[idx, f], y[idx], n_classes)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], int(f), found[1])
        if best is None:
            node.value = counts
            continue
        _, feature, threshold = best
        mask = X[idx, feature] <= threshold
        node.feature = feature
        node.threshold = threshold
        node.left = TreeNode()
        node.right = TreeNode()
        stack.append((node.left, idx[mask], depth + 1))
        stack.append((node.right, idx[~mask], depth + 1))
    return root


def build_regression_tree(X: np.ndarray, target: np.ndarray, max_depth: int,
                          leaf_value=None) -> TreeNode:
    """SSE tree over a continuous target; every column is a candidate.

    ``leaf_value`` maps the target values landing in a leaf to the leaf's
    prediction (defaults to their mean).
    """
    if leaf_value is None:
        leaf_value = lambda t: float(t.mean())
    n = X.shape[0]
    root = TreeNode()
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        t = target[idx]
        if depth >= max_depth or len(idx) < 2 or np.all(t == t[0]):
            node.value = leaf_value(t)
            continue
        best = None
        for f in range(X.shape[1]):
            found = _best_sse_split(X[idx, f], t)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], f, found[1])
        if best is None:
            node.value = leaf_value(t)
            continue
        _, feature, threshold = best
        mask = X[idx, feature] <= threshold
        node.feature = feature
        node.threshold = threshold
        node.left = TreeNode()
        node.right = TreeNode()
        stack.append((node.left, idx[mask], depth + 1))
        stack.append((node.right, idx[~mask], depth + 1))
    return root


def tree_apply(root: TreeNode, X: np.ndarray) -> list[TreeNode]:
    """Leaf node reached by each row."""
    leaves: list[TreeNode | None] = [None] * X.shape[0]
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if node.is_leaf:
            for i in idx:
                leaves[i] = node
            continue
        mask = X[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return leaves


def predict_class_index(root: TreeNode, X: np.ndarray) -> np.ndarray:
    """Majority class index at each row's leaf (lowest index on ties)."""
    return np.array([int(np.argmax(leaf.value)) for leaf in tree_apply(root, X)])


def predict_value(root: TreeNode, X: np.ndarray) -> np.ndarray:
    return np.array([leaf.value for leaf in tree_apply(root, X)], dtype=float)
