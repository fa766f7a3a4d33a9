"""Label-only oracle handles with query counting and budgets.

The adversary-facing channel is ``query``/``query_batch``: it returns a bare
class index, increments the counter by exactly one per label, and never
exposes scores. ``measure_batch`` is the experimenter's side channel for
computing agreement/misclassification metrics without spending queries; a
remote handle only has it when constructed with a local reference copy of the
served model.
"""

from __future__ import annotations

import threading

import numpy as np
import requests

from .errors import (
    BudgetExceededError,
    DataFormatError,
    DimensionMismatchError,
    MeasurementUnavailableError,
    TransportError,
)
from .models import Model


class OracleHandle:
    """Base query channel; thread-safe counter, optional budget."""

    def __init__(self, budget: int | None = None):
        self.budget = budget
        self._count = 0
        self._lock = threading.Lock()

    @property
    def queries_made(self) -> int:
        return self._count

    def _charge(self, n: int = 1) -> None:
        with self._lock:
            if self.budget is not None and self._count + n > self.budget:
                raise BudgetExceededError(
                    f"query budget of {self.budget} exhausted ({self._count} used)"
                )
            self._count += n

    def _label(self, x: np.ndarray) -> int:
        raise NotImplementedError

    def query(self, x) -> int:
        """Label one input; exactly one unit of budget."""
        x = np.asarray(x, dtype=np.float64)
        self._charge(1)
        return self._label(x)

    def query_batch(self, X) -> np.ndarray:
        """Label many inputs; on budget exhaustion the error carries the labels
        obtained so far."""
        X = np.asarray(X, dtype=np.float64)
        labels = np.empty(len(X), dtype=np.int64)
        for i, row in enumerate(X):
            try:
                labels[i] = self.query(row)
            except BudgetExceededError as exc:
                exc.labeled = labels[:i].copy()
                raise
        return labels

    def measure_batch(self, X) -> np.ndarray:
        raise MeasurementUnavailableError("this oracle has no measurement channel")


class LocalOracle(OracleHandle):
    """In-process wrapper around a trained model."""

    def __init__(self, model: Model, budget: int | None = None):
        super().__init__(budget)
        self.model = model

    def _label(self, x: np.ndarray) -> int:
        return int(self.model.predict(x))

    def measure_batch(self, X) -> np.ndarray:
        return np.atleast_1d(self.model.predict(np.asarray(X, dtype=np.float64)))


class RemoteOracle(OracleHandle):
    """HTTP client for the prediction protocol (POST /predict)."""

    def __init__(
        self,
        url: str,
        budget: int | None = None,
        reference_model: Model | None = None,
        timeout: float = 10.0,
        max_retries: int = 2,
    ):
        super().__init__(budget)
        self.url = url.rstrip("/")
        self.reference_model = reference_model
        self.timeout = timeout
        self.max_retries = max_retries
        self._session = requests.Session()

    def _post_predict(self, x: np.ndarray) -> dict:
        payload = {"features": [float(v) for v in x]}
        last_exc = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._session.post(
                    self.url + "/predict", json=payload, timeout=self.timeout
                )
                return resp.json()
            except (requests.ConnectionError, requests.Timeout, ValueError) as exc:
                last_exc = exc
        raise TransportError(
            f"oracle at {self.url} unreachable: {last_exc}", retries=self.max_retries
        )

    def _label(self, x: np.ndarray) -> int:
        body = self._post_predict(x)
        if "label" in body:
            return int(body["label"])
        code = body.get("error", "unknown")
        message = body.get("message", "")
        # the reservation was charged but no label came back; roll it back
        with self._lock:
            self._count -= 1
        if code == "budget-exhausted":
            raise BudgetExceededError(f"server budget exhausted: {message}")
        if code == "bad-dimension":
            raise DimensionMismatchError(message)
        raise DataFormatError(f"oracle error {code}: {message}")

    def server_stats(self) -> dict:
        try:
            return self._session.get(self.url + "/stats", timeout=self.timeout).json()
        except (requests.ConnectionError, requests.Timeout, ValueError) as exc:
            raise TransportError(f"oracle at {self.url} unreachable: {exc}") from None

    def measure_batch(self, X) -> np.ndarray:
        if self.reference_model is None:
            raise MeasurementUnavailableError(
                "remote oracle has no local reference model for measurement"
            )
        return np.atleast_1d(self.reference_model.predict(np.asarray(X, dtype=np.float64)))
