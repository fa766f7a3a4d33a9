"""Nearest-neighbor classifier with a smoothed (soft-min) differentiable variant.

Hard k-NN answers predictions; the smoothed scores replace the argmin over
stored points by a softmax over negative squared distances, which is what the
gradient-based crafting and augmentation routines differentiate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Model, one_hot


@dataclass
class KnnHyperparams:
    k: int = 1


class KnnModel(Model):
    family = "knn"
    differentiable = True  # via the smoothed scores

    def __init__(self, X_train: np.ndarray, y_train: np.ndarray, num_classes: int, k: int = 1):
        X_train = np.asarray(X_train, dtype=np.float64)
        y_train = np.asarray(y_train, dtype=np.int64)
        super().__init__(X_train.shape[1], num_classes)
        self.X_train = X_train
        self.y_train = y_train
        self.Y_train = one_hot(y_train, num_classes)
        self.k = k

    def _sq_dists(self, X: np.ndarray) -> np.ndarray:
        # (B, M) squared euclidean distances, chunked to bound memory
        chunks = []
        for start in range(0, len(X), 512):
            Xc = X[start : start + 512]
            d2 = (
                (Xc * Xc).sum(axis=1)[:, None]
                - 2.0 * Xc @ self.X_train.T
                + (self.X_train * self.X_train).sum(axis=1)[None, :]
            )
            chunks.append(np.maximum(d2, 0.0))
        return np.concatenate(chunks, axis=0)

    def predict(self, x):
        """Hard k-NN vote; ties (and k=1 distance ties) break to the lowest index."""
        X, single = self._as_batch(x)
        d2 = self._sq_dists(X)
        if self.k == 1:
            labels = self.y_train[np.argmin(d2, axis=1)]
        else:
            nearest = np.argpartition(d2, self.k - 1, axis=1)[:, : self.k]
            votes = self.Y_train[nearest].sum(axis=1)
            labels = np.argmax(votes, axis=1).astype(np.int64)
        return int(labels[0]) if single else labels

    def _soft_weights(self, X: np.ndarray) -> np.ndarray:
        s = -self._sq_dists(X)
        s -= s.max(axis=1, keepdims=True)
        e = np.exp(s)
        return e / e.sum(axis=1, keepdims=True)

    def scores_batch(self, X: np.ndarray) -> np.ndarray:
        """Smoothed scores: softmax over -||z - x||^2 dotted with the label matrix."""
        return self._soft_weights(X) @ self.Y_train

    def input_gradient(self, x, y):
        """Gradient of -log f_y(x) through the smoothed scores."""
        X, single = self._as_batch(x)
        y_arr = np.atleast_1d(np.asarray(y, dtype=np.int64))
        p = self._soft_weights(X)                      # (B, M)
        f_y = (p * self.Y_train[:, y_arr].T).sum(axis=1)
        f_y = np.maximum(f_y, 1e-300)
        # d f_y / d x = 2 [ sum_z 1{label z = y} p_z (z - x) - f_y sum_u p_u (u - x) ]
        w_y = p * self.Y_train[:, y_arr].T
        term_y = w_y @ self.X_train - w_y.sum(axis=1)[:, None] * X
        mean_g = p @ self.X_train - X
        grad_f = 2.0 * (term_y - f_y[:, None] * mean_g)
        grad = -grad_f / f_y[:, None]
        return grad[0] if single else grad

    def jacobian(self, x) -> np.ndarray:
        X, _ = self._as_batch(x)
        p = self._soft_weights(X)[0]                   # (M,)
        f = p @ self.Y_train                           # (N,)
        G = self.X_train - X[0]                        # rows are z - x
        mean_g = p @ G
        return 2.0 * (self.Y_train.T @ (p[:, None] * G) - f[:, None] * mean_g)


def train_knn(dataset, hyper: KnnHyperparams | None = None, seed=0):
    """k-NN just memorizes the training data."""
    hyper = hyper or KnnHyperparams()
    return KnnModel(dataset.X, dataset.y, dataset.num_classes, k=hyper.k)
