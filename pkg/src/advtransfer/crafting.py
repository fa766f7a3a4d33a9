"""White-box adversarial sample crafting for the five model families.

Gradient families (net, logreg, smoothed kNN) use the fast gradient sign
method; linear SVMs are pushed against their own hyperplane; decision trees
are evaded by rerouting the sample to a differing-class leaf. All outputs are
clipped into [0, 1]^d and perturbation metrics are computed on the clipped
delta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import (
    DegenerateModelError,
    DimensionMismatchError,
    NoAdversarialExistsError,
    UnsupportedFamilyError,
)
from .models import Model
from .models.svm import LinearSvm
from .models.tree import DecisionTree, TreeNode, iter_leaves, path_from_root

# offset applied to a feature pushed across a tree threshold
TREE_PERTURBATION_GAMMA = 0.01

CRAFT_METHODS = ("fgsm", "svm", "tree")
DIFFERENTIABLE_FAMILIES = ("net", "logreg", "knn")


@dataclass(frozen=True)
class Perturbation:
    """Crafted delta with its magnitude accounting (recomputed, never stored stale)."""

    delta: np.ndarray
    epsilon: float
    l1_fraction: float
    linf: float

    @classmethod
    def from_delta(cls, delta: np.ndarray, epsilon: float) -> "Perturbation":
        delta = np.asarray(delta, dtype=np.float64)
        return cls(
            delta=delta,
            epsilon=float(epsilon),
            l1_fraction=float(np.abs(delta).sum() / delta.size),
            linf=float(np.abs(delta).max()) if delta.size else 0.0,
        )


@dataclass(frozen=True)
class CraftRecord:
    x: np.ndarray
    x_adv: np.ndarray
    perturbation: Perturbation
    source_pred: int
    adv_pred: int
    true_label: int
    crafted: bool = True  # False when no adversarial sample exists (tree attack)


@dataclass(frozen=True)
class CraftResult:
    records: list[CraftRecord]
    method: str
    epsilon: float
    mean_l1_fraction: float
    source_misclassification: float

    def __len__(self):
        return len(self.records)


def fgsm(model: Model, x, y, epsilon: float):
    """x* = clip(x + eps * sign(grad_x cost(model, x, y))); sign(0) leaves a
    component untouched. Also works on batches. Returns (x*, Perturbation)."""
    if not model.differentiable:
        raise UnsupportedFamilyError(f"FGSM needs a differentiable model, got {model.family}")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    grad = model.input_gradient(x, y)
    x_arr = np.asarray(x, dtype=np.float64)
    x_adv = np.clip(x_arr + epsilon * np.sign(grad), 0.0, 1.0)
    if x_arr.ndim == 1:
        return x_adv, Perturbation.from_delta(x_adv - x_arr, epsilon)
    return x_adv, [Perturbation.from_delta(d, epsilon) for d in x_adv - x_arr]


def svm_attack(model: LinearSvm, x, epsilon: float):
    """Perturb against the hyperplane of the predicted class:
    x* = clip(x - eps * w[k] / ||w[k]||) with k = predict(model, x)."""
    if not isinstance(model, LinearSvm):
        raise UnsupportedFamilyError(f"svm_attack needs a linear SVM, got {model.family}")
    x_arr = np.asarray(x, dtype=np.float64)
    single = x_arr.ndim == 1
    X = x_arr[None, :] if single else x_arr
    k = np.atleast_1d(model.predict(X))
    w = model.weights[k]
    norms = np.linalg.norm(w, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateModelError("predicted class has a zero-norm hyperplane")
    X_adv = np.clip(X - epsilon * w / norms[:, None], 0.0, 1.0)
    if single:
        return X_adv[0], Perturbation.from_delta(X_adv[0] - X[0], epsilon)
    return X_adv, [Perturbation.from_delta(d, epsilon) for d in X_adv - X]


def _interval_along(path: list[tuple[TreeNode, bool]]) -> dict[int, tuple[float, float]]:
    """Per-feature open/closed interval (lo, hi] implied by a root-to-leaf path."""
    bounds: dict[int, tuple[float, float]] = {}
    for node, goes_left in path:
        lo, hi = bounds.get(node.feature, (-np.inf, np.inf))
        if goes_left:
            hi = min(hi, node.threshold)
        else:
            lo = max(lo, node.threshold)
        bounds[node.feature] = (lo, hi)
    return bounds


def _route_toward(x: np.ndarray, leaf: TreeNode, gamma: float) -> np.ndarray | None:
    """Perturb only the decision-path features of x so it reaches `leaf`.

    Features already satisfying their interval are left untouched; violated
    ones are set to threshold +/- gamma (interval midpoint when gamma does not
    fit). Returns None when the path constraints are unsatisfiable, which can
    only happen for hand-built inconsistent trees.
    """
    x_adv = x.copy()
    for feature, (lo, hi) in _interval_along(path_from_root(leaf)).items():
        if lo >= hi:
            return None
        v = x_adv[feature]
        if lo < v <= hi:
            continue
        v = hi - gamma if v > hi else lo + gamma
        if not lo < v <= hi:
            v = (lo + hi) / 2.0
        x_adv[feature] = min(max(v, 0.0), 1.0)
    return x_adv


def dt_attack(tree: DecisionTree, x, legitimate_class: int, gamma: float = TREE_PERTURBATION_GAMMA):
    """Craft a sample the tree routes to a leaf of a different class.

    Walks the ancestors of the sample's leaf from the nearest up; under each
    ancestor's sibling subtree it looks for the shallowest leaf (ties broken
    left-first) whose class differs from legitimate_class, then perturbs
    exactly the features on the path to that leaf. Raises
    NoAdversarialExistsError when every leaf shares the legitimate class.
    """
    x_arr = np.asarray(x, dtype=np.float64)
    if x_arr.shape != (tree.dim,):
        raise DimensionMismatchError(f"expected vector of dim {tree.dim}")
    leaf = tree.leaf_for(x_arr)
    if leaf.klass != legitimate_class:
        raise ValueError(
            f"tree already assigns class {leaf.klass}, not {legitimate_class}"
        )

    node = leaf
    while node.parent is not None:
        parent = node.parent
        sibling = parent.right if node is parent.left else parent.left
        candidates = sorted(
            (
                (depth, order, cand)
                for order, (cand, depth) in enumerate(iter_leaves(sibling))
                if cand.klass != legitimate_class
            ),
            key=lambda item: (item[0], item[1]),
        )
        for _depth, _order, cand in candidates:
            x_adv = _route_toward(x_arr, cand, gamma)
            if x_adv is not None and tree.leaf_for(x_adv).klass != legitimate_class:
                return x_adv, Perturbation.from_delta(x_adv - x_arr, gamma)
        node = parent

    raise NoAdversarialExistsError(
        "no reachable leaf with a class different from the legitimate class"
    )


def craft_batch(model: Model, dataset: Dataset, method: str, epsilon: float) -> CraftResult:
    """Craft one adversarial sample per dataset input and report batch metrics.

    FGSM uses the dataset's true labels for the cost; the tree attack treats
    the tree's own prediction as the legitimate class.
    """
    if method not in CRAFT_METHODS:
        raise UnsupportedFamilyError(f"unknown crafting method {method!r}")
    if method == "fgsm" and model.family not in DIFFERENTIABLE_FAMILIES:
        raise UnsupportedFamilyError(f"FGSM is incompatible with family {model.family}")
    if method == "svm" and model.family != "svm":
        raise UnsupportedFamilyError(f"svm method is incompatible with family {model.family}")
    if method == "tree" and model.family != "tree":
        raise UnsupportedFamilyError(f"tree method is incompatible with family {model.family}")

    X, y = dataset.X, dataset.y
    source_preds = model.predict(X)

    if method == "fgsm":
        X_adv, perts = fgsm(model, X, y, epsilon)
        crafted = [True] * len(X)
    elif method == "svm":
        X_adv, perts = svm_attack(model, X, epsilon)
        crafted = [True] * len(X)
    else:
        X_adv = np.empty_like(X)
        perts, crafted = [], []
        for i, row in enumerate(X):
            try:
                adv, pert = dt_attack(model, row, int(source_preds[i]))
                ok = True
            except NoAdversarialExistsError:
                adv, pert = row.copy(), Perturbation.from_delta(np.zeros_like(row), 0.0)
                ok = False
            X_adv[i] = adv
            perts.append(pert)
            crafted.append(ok)

    adv_preds = model.predict(X_adv)
    records = [
        CraftRecord(
            x=X[i],
            x_adv=X_adv[i],
            perturbation=perts[i],
            source_pred=int(source_preds[i]),
            adv_pred=int(adv_preds[i]),
            true_label=int(y[i]),
            crafted=crafted[i],
        )
        for i in range(len(X))
    ]
    return CraftResult(
        records=records,
        method=method,
        epsilon=float(epsilon),
        mean_l1_fraction=float(np.mean([r.perturbation.l1_fraction for r in records])),
        source_misclassification=float(np.mean([r.adv_pred != r.true_label for r in records])),
    )


def method_for_family(family: str) -> str:
    """Default crafting method for a model family."""
    if family in DIFFERENTIABLE_FAMILIES:
        return "fgsm"
    if family in ("svm", "tree"):
        return family
    raise UnsupportedFamilyError(f"no crafting method for family {family!r}")
