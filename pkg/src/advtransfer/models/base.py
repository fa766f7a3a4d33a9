"""Common classifier interface.

Every family exposes ``class_scores`` / ``predict`` over single samples or
batches; differentiable families add ``input_gradient`` (cross-entropy cost
w.r.t. the input) and ``jacobian`` (class scores w.r.t. the input). Argmax
ties always break toward the lowest class index, for every family.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatchError, UnsupportedFamilyError


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    out = np.zeros((len(labels), num_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


class Model:
    """Base classifier: subclasses set family/dim/num_classes and scores()."""

    family = "base"
    differentiable = False

    def __init__(self, dim: int, num_classes: int):
        self.dim = dim
        self.num_classes = num_classes

    # -- shape plumbing ----------------------------------------------------
    def _as_batch(self, x) -> tuple[np.ndarray, bool]:
        arr = np.asarray(x, dtype=np.float64)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"{self.family}: expected vectors of dim {self.dim}, got shape {arr.shape}"
            )
        return arr, single

    # -- interface ---------------------------------------------------------
    def scores_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def class_scores(self, x):
        X, single = self._as_batch(x)
        s = self.scores_batch(X)
        return s[0] if single else s

    def predict(self, x):
        X, single = self._as_batch(x)
        labels = np.argmax(self.scores_batch(X), axis=1).astype(np.int64)
        return int(labels[0]) if single else labels

    def input_gradient(self, x, y):
        raise UnsupportedFamilyError(f"{self.family} has no input gradient")

    def jacobian(self, x) -> np.ndarray:
        raise UnsupportedFamilyError(f"{self.family} has no Jacobian")

    def jacobian_rows(self, X: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Row ``rows[i]`` of the Jacobian at X[i], for a whole batch."""
        X, _ = self._as_batch(X)
        return np.stack([self.jacobian(x)[r] for x, r in zip(X, np.asarray(rows))])


def accuracy(model: Model, dataset) -> float:
    """Fraction of dataset samples the model labels correctly."""
    return float(np.mean(model.predict(dataset.X) == dataset.y))
