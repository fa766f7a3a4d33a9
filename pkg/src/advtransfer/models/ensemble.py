"""Majority-vote ensemble over the five expert families."""

from __future__ import annotations

import numpy as np

from ..errors import DataConsistencyError
from .base import Model


class Ensemble(Model):
    """Outputs the most frequent expert choice; ties go to the lowest class index."""

    family = "ensemble"
    differentiable = False

    def __init__(self, experts: list[Model]):
        dims = {m.dim for m in experts}
        classes = {m.num_classes for m in experts}
        if len(dims) != 1 or len(classes) != 1:
            raise DataConsistencyError("ensemble experts must share dim and num_classes")
        super().__init__(dims.pop(), classes.pop())
        self.experts = list(experts)

    def vote_counts(self, X: np.ndarray) -> np.ndarray:
        X, _ = self._as_batch(X)
        counts = np.zeros((len(X), self.num_classes))
        for expert in self.experts:
            labels = expert.predict(X)
            counts[np.arange(len(X)), labels] += 1.0
        return counts

    def scores_batch(self, X: np.ndarray) -> np.ndarray:
        return self.vote_counts(X) / len(self.experts)
