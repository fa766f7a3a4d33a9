"""CART decision tree (Gini impurity, axis-aligned thresholds on x[f] <= t)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import Model, one_hot


@dataclass
class TreeHyperparams:
    max_depth: int = 15
    min_leaf: int = 5


@dataclass(eq=False)
class TreeNode:
    """Internal node (feature/threshold/left/right) or leaf (klass set)."""

    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    parent: "TreeNode | None" = field(default=None, repr=False)
    klass: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.klass is not None


def link_parents(node: TreeNode, parent: TreeNode | None = None) -> TreeNode:
    """(Re)establish parent pointers over a node structure; returns the root."""
    node.parent = parent
    if not node.is_leaf:
        link_parents(node.left, node)
        link_parents(node.right, node)
    return node


def iter_leaves(node: TreeNode, depth: int = 0):
    """Yield (leaf, depth) pairs, left subtree first."""
    if node.is_leaf:
        yield node, depth
    else:
        yield from iter_leaves(node.left, depth + 1)
        yield from iter_leaves(node.right, depth + 1)


def path_from_root(leaf: TreeNode) -> list[tuple[TreeNode, bool]]:
    """Decision path to a leaf as (internal node, goes_left) pairs, root first."""
    steps = []
    node = leaf
    while node.parent is not None:
        steps.append((node.parent, node is node.parent.left))
        node = node.parent
    steps.reverse()
    return steps


class DecisionTree(Model):
    """Binary tree over [0, 1]^d; every input reaches exactly one leaf."""

    family = "tree"
    differentiable = False

    def __init__(self, root: TreeNode, dim: int, num_classes: int):
        super().__init__(dim, num_classes)
        self.root = link_parents(root)

    def leaf_for(self, x: np.ndarray) -> TreeNode:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def predict(self, x):
        X, single = self._as_batch(x)
        labels = np.fromiter(
            (self.leaf_for(row).klass for row in X), dtype=np.int64, count=len(X)
        )
        return int(labels[0]) if single else labels

    def scores_batch(self, X: np.ndarray) -> np.ndarray:
        return one_hot(self.predict(X), self.num_classes)

    def leaves(self) -> list[TreeNode]:
        return [leaf for leaf, _ in iter_leaves(self.root)]


def _gini_best_split(X, y_mapped, num_classes, min_leaf):
    """Best (feature, threshold, weighted child Gini) via a sorted sweep per feature."""
    n = len(y_mapped)
    best = (None, None, np.inf)
    encoded = one_hot(y_mapped, num_classes)
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        vals = X[order, f]
        change = np.nonzero(vals[:-1] != vals[1:])[0]
        if change.size == 0:
            continue
        cum = np.cumsum(encoded[order], axis=0)
        n_left = change + 1
        n_right = n - n_left
        valid = (n_left >= min_leaf) & (n_right >= min_leaf)
        if not valid.any():
            continue
        left_counts = cum[change]
        right_counts = cum[-1] - left_counts
        gini_left = 1.0 - ((left_counts / n_left[:, None]) ** 2).sum(axis=1)
        gini_right = 1.0 - ((right_counts / n_right[:, None]) ** 2).sum(axis=1)
        weighted = (n_left * gini_left + n_right * gini_right) / n
        weighted[~valid] = np.inf
        pos = int(np.argmin(weighted))
        if weighted[pos] < best[2]:
            i = change[pos]
            threshold = (vals[i] + vals[i + 1]) / 2.0
            best = (f, float(threshold), float(weighted[pos]))
    return best


def _majority(y_mapped, num_classes) -> int:
    return int(np.argmax(np.bincount(y_mapped, minlength=num_classes)))


def _grow(X, y, num_classes, hyper, depth) -> TreeNode:
    if (
        depth >= hyper.max_depth
        or len(y) < 2 * hyper.min_leaf
        or np.all(y == y[0])
    ):
        return TreeNode(klass=_majority(y, num_classes))
    feature, threshold, child_gini = _gini_best_split(X, y, num_classes, hyper.min_leaf)
    parent_gini = 1.0 - ((np.bincount(y, minlength=num_classes) / len(y)) ** 2).sum()
    if feature is None or child_gini >= parent_gini:
        return TreeNode(klass=_majority(y, num_classes))
    mask = X[:, feature] <= threshold
    return TreeNode(
        feature=feature,
        threshold=threshold,
        left=_grow(X[mask], y[mask], num_classes, hyper, depth + 1),
        right=_grow(X[~mask], y[~mask], num_classes, hyper, depth + 1),
    )


def train_decision_tree(dataset, hyper: TreeHyperparams | None = None, seed=0):
    """Grow a CART tree; `seed` is accepted for interface parity (fits are deterministic)."""
    hyper = hyper or TreeHyperparams()
    root = _grow(dataset.X, dataset.y, dataset.num_classes, hyper, depth=0)
    return DecisionTree(root, dataset.dim, dataset.num_classes)
