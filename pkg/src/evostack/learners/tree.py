"""CART-style regression trees and bootstrap forests.

Trees grow greedily and unpruned: at each node, `mtry` randomly chosen
features are scanned and the split minimizing the summed child squared error
wins; candidate thresholds are midpoints between consecutive distinct sorted
values, and both children must keep at least `min_leaf` samples. Nodes with
fewer than 2 * min_leaf samples, zero target spread, or no valid split become
leaves predicting their training-target mean.

A forest trains `n_trees` such trees on independent bootstrap resamples
(size N, drawn with replacement) and predicts the mean of the tree outputs.
Tree i derives all its randomness from the i-th child stream spawned off the
forest's rng: bootstrap indices first, then per-node feature subsets in
depth-first (left child first) order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from .base import AveragePredictor, LearnerSpec, RegressionFunction
from ..seeding import as_rng

DEFAULT_MIN_LEAF = 5


class TreeLeaf:
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)


class TreeNode:
    __slots__ = ("feature", "threshold", "left", "right")

    def __init__(self, feature: int, threshold: float):
        self.feature = int(feature)
        self.threshold = float(threshold)
        self.left = None
        self.right = None


def default_mtry(p: int) -> int:
    """Features tried per split when unspecified: the regression default p/3."""
    return max(1, p // 3)


@dataclass(frozen=True)
class ForestSpec(LearnerSpec):
    n_trees: int
    mtry: int | None = None  # None -> default_mtry(p) at training time
    min_leaf: int = DEFAULT_MIN_LEAF
    name: str = ""

    def __post_init__(self):
        if not self.name:
            name = f"rf_n{self.n_trees}"
            if self.mtry is not None:
                name += f"_mtry{self.mtry}"
            if self.min_leaf != DEFAULT_MIN_LEAF:
                name += f"_leaf{self.min_leaf}"
            object.__setattr__(self, "name", name)

    def train(self, tr: Dataset, rng) -> "ForestRegression":
        return train_random_forest(tr, self.n_trees, rng,
                                   mtry=self.mtry, min_leaf=self.min_leaf)


class RegressionTree(RegressionFunction):
    def __init__(self, root, n_features: int):
        self.root = root
        self.n_features = int(n_features)

    def predict(self, X):
        X = self._as_matrix(X)
        out = np.empty(X.shape[0])
        stack = [(self.root, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if isinstance(node, TreeLeaf):
                out[idx] = node.value
                continue
            go_left = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out


class ForestRegression(AveragePredictor):
    @property
    def trees(self):
        return self.members


def _best_split_on_feature(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best (sse, threshold) for one feature, or None if no valid split exists."""
    n = x.shape[0]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    csum = np.cumsum(ys)
    csq = np.cumsum(ys * ys)
    total, total_sq = csum[-1], csq[-1]
    left_sizes = np.arange(min_leaf, n - min_leaf + 1)
    if left_sizes.size == 0:
        return None
    distinct = xs[left_sizes - 1] < xs[left_sizes]
    left_sizes = left_sizes[distinct]
    if left_sizes.size == 0:
        return None
    left_sum = csum[left_sizes - 1]
    left_sq = csq[left_sizes - 1]
    right_sizes = n - left_sizes
    sse = (left_sq - left_sum ** 2 / left_sizes) \
        + ((total_sq - left_sq) - (total - left_sum) ** 2 / right_sizes)
    j = int(np.argmin(sse))  # first minimum -> lowest threshold wins ties
    i = left_sizes[j]
    threshold = 0.5 * (xs[i - 1] + xs[i])
    if threshold >= xs[i]:  # midpoint rounded up to the right value
        threshold = xs[i - 1]
    return float(sse[j]), threshold


def _grow_tree(X: np.ndarray, y: np.ndarray, mtry: int, min_leaf: int, rng) -> RegressionTree:
    p = X.shape[1]
    root_box = [None]
    # depth-first, left child first: fixes the per-node rng draw order
    stack = [(np.arange(X.shape[0]), root_box)]
    while stack:
        idx, box = stack.pop()
        ysub = y[idx]
        node = None
        if idx.size >= 2 * min_leaf and ysub.min() < ysub.max():
            feats = np.sort(rng.choice(p, size=mtry, replace=False))
            best = None
            for f in feats:
                found = _best_split_on_feature(X[idx, f], ysub, min_leaf)
                if found is not None and (best is None or found[0] < best[0]):
                    best = (found[0], f, found[1])
            if best is not None:
                node = TreeNode(best[1], best[2])
        if node is None:
            box[0] = TreeLeaf(ysub.mean())
            continue
        box[0] = node
        go_left = X[idx, node.feature] <= node.threshold
        stack.append((idx[~go_left], _NodeSlot(node, "right")))
        stack.append((idx[go_left], _NodeSlot(node, "left")))
    return RegressionTree(root_box[0], p)


class _NodeSlot:
    """Assignable child slot of a TreeNode, list-like for the build stack."""

    __slots__ = ("node", "side")

    def __init__(self, node: TreeNode, side: str):
        self.node = node
        self.side = side

    def __setitem__(self, _key, value):
        setattr(self.node, self.side, value)


def train_regression_tree(tr: Dataset, mtry: int, min_leaf: int, rng) -> RegressionTree:
    """Grow one unpruned variance-reduction tree."""
    if not 1 <= mtry <= tr.n_features:
        raise ValueError(f"mtry must lie in [1, {tr.n_features}], got {mtry}")
    if min_leaf < 1:
        raise ValueError(f"min_leaf must be >= 1, got {min_leaf}")
    return _grow_tree(tr.features, tr.targets, int(mtry), int(min_leaf), as_rng(rng))


def train_random_forest(tr: Dataset, n_trees: int, rng, *,
                        mtry: int | None = None,
                        min_leaf: int = DEFAULT_MIN_LEAF) -> ForestRegression:
    """Bootstrap forest; deterministic for a fixed seed."""
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    if mtry is None:
        mtry = default_mtry(tr.n_features)
    if not 1 <= mtry <= tr.n_features:
        raise ValueError(f"mtry must lie in [1, {tr.n_features}], got {mtry}")
    if min_leaf < 1:
        raise ValueError(f"min_leaf must be >= 1, got {min_leaf}")
    rng = as_rng(rng)
    X, y = tr.features, tr.targets
    trees = []
    for child in rng.spawn(n_trees):
        boot = child.integers(0, tr.n_samples, size=tr.n_samples)
        trees.append(_grow_tree(X[boot], y[boot], mtry, min_leaf, child))
    return ForestRegression(trees)
