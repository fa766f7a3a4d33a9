"""Multi-class (softmax) logistic regression with closed-form input derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .base import Model, one_hot, softmax


@dataclass
class LogregHyperparams:
    epochs: int = 15
    learning_rate: float = 1e-2
    momentum: float = 0.9
    decay_epoch: int = 10      # halve lr and momentum after this many epochs
    batch_size: int = 100


class SoftmaxRegression(Model):
    """p_j(x) = exp(w_j.x + b_j) / sum_l exp(w_l.x + b_l)."""

    family = "logreg"
    differentiable = True

    def __init__(self, weights: np.ndarray, biases: np.ndarray):
        weights = np.asarray(weights, dtype=np.float64)
        biases = np.asarray(biases, dtype=np.float64)
        super().__init__(weights.shape[1], weights.shape[0])
        self.weights = weights
        self.biases = biases

    def scores_batch(self, X: np.ndarray) -> np.ndarray:
        return softmax(X @ self.weights.T + self.biases)

    def input_gradient(self, x, y):
        """Gradient of the cross-entropy cost -log p_y(x) w.r.t. x."""
        X, single = self._as_batch(x)
        y_arr = np.atleast_1d(np.asarray(y, dtype=np.int64))
        p = self.scores_batch(X)
        grad = (p - one_hot(y_arr, self.num_classes)) @ self.weights
        return grad[0] if single else grad

    def jacobian(self, x) -> np.ndarray:
        """d p_i / d x_j = p_i * (w_i[j] - sum_l p_l w_l[j])."""
        X, _ = self._as_batch(x)
        p = self.scores_batch(X)[0]
        return p[:, None] * (self.weights - p @ self.weights)

    def jacobian_rows(self, X: np.ndarray, rows: np.ndarray) -> np.ndarray:
        X, _ = self._as_batch(X)
        rows = np.asarray(rows, dtype=np.int64)
        p = self.scores_batch(X)
        sel = p[np.arange(len(X)), rows]
        return sel[:, None] * (self.weights[rows] - p @ self.weights)


def train_softmax_regression(dataset, hyper: LogregHyperparams | None = None, seed=0):
    """Mini-batch SGD with momentum on the cross-entropy loss."""
    if dataset.num_classes < 2:
        raise TrainingError("softmax regression needs at least two classes")
    hyper = hyper or LogregHyperparams()
    rng = np.random.default_rng(seed)
    n, d = dataset.X.shape
    num_classes = dataset.num_classes

    W = np.zeros((num_classes, d))
    b = np.zeros(num_classes)
    vW = np.zeros_like(W)
    vb = np.zeros_like(b)
    Y = one_hot(dataset.y, num_classes)

    lr, mom = hyper.learning_rate, hyper.momentum
    for epoch in range(hyper.epochs):
        if epoch == hyper.decay_epoch:
            lr *= 0.5
            mom *= 0.5
        order = rng.permutation(n)
        for start in range(0, n, hyper.batch_size):
            idx = order[start : start + hyper.batch_size]
            Xb, Yb = dataset.X[idx], Y[idx]
            p = softmax(Xb @ W.T + b)
            delta = (p - Yb) / len(idx)
            gW = delta.T @ Xb
            gb = delta.sum(axis=0)
            vW = mom * vW - lr * gW
            vb = mom * vb - lr * gb
            W = W + vW
            b = b + vb
    return SoftmaxRegression(W, b)
