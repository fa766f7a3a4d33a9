"""One-vs-rest linear SVM trained by subgradient descent on the hinge loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .base import Model


@dataclass
class SvmHyperparams:
    epochs: int = 30
    learning_rate: float = 0.05
    l2: float = 1e-4
    batch_size: int = 100


class LinearSvm(Model):
    """N binary hyperplane classifiers; predictions take the strongest margin.

    ``class_scores`` returns the raw signed margins w[k].x + b_k (not a
    probability simplex).
    """

    family = "svm"
    differentiable = False

    def __init__(self, weights: np.ndarray, biases: np.ndarray):
        weights = np.asarray(weights, dtype=np.float64)
        biases = np.asarray(biases, dtype=np.float64)
        super().__init__(weights.shape[1], weights.shape[0])
        self.weights = weights
        self.biases = biases

    def scores_batch(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights.T + self.biases

    def hyperplane_norms(self) -> np.ndarray:
        return np.linalg.norm(self.weights, axis=1)


def train_linear_svm(dataset, hyper: SvmHyperparams | None = None, seed=0):
    """Subgradient descent on mean hinge loss + (l2/2)||w||^2 per subclassifier.

    All one-vs-rest subproblems share each mini-batch, so a single pass
    updates every hyperplane.
    """
    if dataset.num_classes < 2:
        raise TrainingError("one-vs-rest SVM needs at least two classes")
    hyper = hyper or SvmHyperparams()
    rng = np.random.default_rng(seed)
    n, d = dataset.X.shape
    num_classes = dataset.num_classes

    W = np.zeros((num_classes, d))
    b = np.zeros(num_classes)
    # targets[i, k] = +1 when sample i belongs to class k, else -1
    targets = np.full((n, num_classes), -1.0)
    targets[np.arange(n), dataset.y] = 1.0

    lr = hyper.learning_rate
    for _epoch in range(hyper.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hyper.batch_size):
            idx = order[start : start + hyper.batch_size]
            Xb, Tb = dataset.X[idx], targets[idx]
            margins = Xb @ W.T + b
            violating = (1.0 - Tb * margins) > 0.0
            coeff = Tb * violating
            gW = hyper.l2 * W - (coeff.T @ Xb) / len(idx)
            gb = -coeff.sum(axis=0) / len(idx)
            W = W - lr * gW
            b = b - lr * gb
    return LinearSvm(W, b)
