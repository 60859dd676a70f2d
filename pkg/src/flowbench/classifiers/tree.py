"""CART-style binary decision tree minimizing Gini impurity.

Splits are enumerated exactly: candidate thresholds are the midpoints of
consecutive distinct sorted values of each feature, and ties break to the
lowest feature index, then the lowest threshold. The tree grows until
nodes are pure or no candidate split reduces the weighted impurity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ingest import FeatureMatrix


@dataclass
class TreeNode:
    """Internal node (feature/threshold/children) or leaf (class counts)."""

    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    counts: tuple[int, int] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def n_nodes(self) -> int:
        if self.is_leaf:
            return 1
        return 1 + self.left.n_nodes() + self.right.n_nodes()


def gini(weight0: float, weight1: float) -> float:
    total = weight0 + weight1
    if total <= 0:
        return 0.0
    p0 = weight0 / total
    p1 = weight1 / total
    return 1.0 - p0 * p0 - p1 * p1


def best_split(x, y, w):
    """Exhaustive best (feature, threshold) by weighted Gini, or None.

    Returns (feature, threshold, weighted_gini); None when no candidate
    split exists or none strictly reduces the node impurity.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    w = np.ones(x.shape[0]) if w is None else np.asarray(w, dtype=np.float64)
    total_w = w.sum()
    total_w1 = float(w[y == 1].sum())
    total_w0 = total_w - total_w1
    parent = gini(total_w0, total_w1)

    best = None
    for feature in range(x.shape[1]):
        order = np.argsort(x[:, feature], kind="stable")
        xs = x[order, feature]
        ws = w[order]
        w1s = ws * (y[order] == 1)
        cut = np.flatnonzero(xs[:-1] != xs[1:])
        if cut.size == 0:
            continue
        left_w = np.cumsum(ws)[cut]
        left_w1 = np.cumsum(w1s)[cut]
        left_w0 = left_w - left_w1
        right_w1 = total_w1 - left_w1
        right_w0 = total_w0 - left_w0
        right_w = total_w - left_w
        g_left = 1.0 - (left_w0 / left_w) ** 2 - (left_w1 / left_w) ** 2
        g_right = 1.0 - (right_w0 / right_w) ** 2 - (right_w1 / right_w) ** 2
        weighted = (left_w * g_left + right_w * g_right) / total_w
        pick = int(np.argmin(weighted))  # first minimum = lowest threshold
        if best is None or weighted[pick] < best[2]:
            threshold = (xs[cut[pick]] + xs[cut[pick] + 1]) / 2.0
            best = (feature, float(threshold), float(weighted[pick]))
    if best is None or best[2] >= parent:
        return None
    return best


def dt_fit(train: FeatureMatrix, sample_weight=None, max_depth=None) -> TreeNode:
    """Grow a tree to purity (or until no split reduces weighted Gini)."""
    x = train.values
    y = train.labels
    if x.shape[0] == 0:
        raise ValueError("cannot fit a tree on an empty matrix")
    w = None if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)

    root = TreeNode()
    stack = [(root, np.arange(x.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        n1 = int((ys == 1).sum())
        node.counts = (len(idx) - n1, n1)
        if n1 == 0 or n1 == len(idx) or (max_depth is not None and depth >= max_depth):
            continue
        found = best_split(x[idx], ys, None if w is None else w[idx])
        if found is None:
            continue
        feature, threshold, _ = found
        node.feature = feature
        node.threshold = threshold
        node.left = TreeNode()
        node.right = TreeNode()
        go_left = x[idx, feature] <= threshold
        stack.append((node.left, idx[go_left], depth + 1))
        stack.append((node.right, idx[~go_left], depth + 1))
    return root


def dt_score(model: TreeNode, m) -> np.ndarray:
    """Per-row probability of class 1 = leaf class-1 fraction."""
    x = m.values if isinstance(m, FeatureMatrix) else np.asarray(m, dtype=np.float64)
    probs = np.empty(x.shape[0])
    stack = [(model, np.arange(x.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            n0, n1 = node.counts
            probs[idx] = n1 / (n0 + n1)
            continue
        if node.feature >= x.shape[1]:
            raise ValueError(
                f"tree expects at least {node.feature + 1} features, data has {x.shape[1]}"
            )
        go_left = x[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))
    return probs
