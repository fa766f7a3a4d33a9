"""Substitute model learning against a label-only oracle.

The training set is grown by stepping each input along the sign of the
substitute's Jacobian row for the oracle's label, retraining from scratch
between augmentations. Two refinements are supported: a periodic step size
whose sign flips every tau iterations, and reservoir sampling that caps the
number of new oracle queries per iteration once the set has grown past the
sigma-th doubling. SVM substitutes use a hyperplane-directed variant instead
of the Jacobian step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import BudgetExceededError, DataSizeError, UnsupportedFamilyError
from .models import Model, train
from .models.svm import LinearSvm
from .oracle import OracleHandle

SUBSTITUTE_FAMILIES = ("net", "logreg", "svm")


@dataclass
class SubstituteConfig:
    """Knobs of the augmentation loop; defaults mirror the reference protocol
    (n=100, lam=0.1, tau=3, sigma=3, kappa=400, ten iterations)."""

    family: str = "logreg"
    lam: float = 0.1
    tau: int = 3
    sigma: int = 3
    kappa: int = 400
    rho_max: int = 10
    initial_set_size: int = 100
    seed: int = 0
    use_pss: bool = True
    use_reservoir: bool = True
    deduplicate: bool = False
    hyperparams: object | None = None  # per-family trainer override

    def __post_init__(self):
        if self.family not in SUBSTITUTE_FAMILIES:
            raise UnsupportedFamilyError(
                f"substitute family must be one of {SUBSTITUTE_FAMILIES}, got {self.family!r}"
            )
        if self.lam <= 0:
            raise ValueError("lam must be > 0")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.rho_max < 1:
            raise ValueError("rho_max must be >= 1")
        if self.initial_set_size < 1:
            raise ValueError("initial_set_size must be >= 1")


@dataclass(frozen=True)
class IterationMetrics:
    rho: int
    set_size: int
    queries: int
    agreement: float | None


@dataclass
class SubstituteState:
    model: Model
    training_set: Dataset
    rho: int
    metrics: list[IterationMetrics]
    queries_used: int
    budget_exhausted: bool = False
    zero_norm_skips: int = 0
    duplicates_dropped: int = 0


def step_size(lam: float, tau: int, rho: int) -> float:
    """Periodic step size: lam * (-1)^floor(rho / tau)."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    return lam * (-1.0) ** (rho // tau)


def query_count(n: int, sigma: int, kappa: int, rho: int, use_reservoir: bool) -> int:
    """Oracle labels requested by a full run to iteration rho.

    Vanilla doubling costs n * 2^rho; with reservoir sampling after the
    sigma-th doubling it drops to n * 2^sigma + kappa * (rho - sigma).
    """
    if not use_reservoir:
        return n * 2**rho
    if rho < sigma:
        raise ValueError("reservoir accounting needs rho >= sigma")
    return n * 2**sigma + kappa * (rho - sigma)


def _dedup(X_new: np.ndarray, existing: np.ndarray) -> tuple[np.ndarray, int]:
    """Drop new rows equal to an existing row or to an earlier new row."""
    seen = {row.tobytes() for row in existing}
    keep = []
    for i, row in enumerate(X_new):
        key = row.tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return X_new[keep], len(X_new) - len(keep)


def _append_labeled(current: Dataset, X_new: np.ndarray, oracle: OracleHandle) -> Dataset:
    y_new = oracle.query_batch(X_new)
    return Dataset(
        np.vstack([current.X, X_new]),
        np.concatenate([current.y, y_new]),
        current.num_classes,
    )


def jacobian_augment(
    substitute: Model,
    current: Dataset,
    oracle: OracleHandle,
    lambda_rho: float,
    deduplicate: bool = False,
) -> tuple[Dataset, int]:
    """Full augmentation: every point steps along sign(J[oracle label]), doubling
    the set; the new points are clipped and labeled by the oracle (one query
    each). Returns (augmented set, duplicates dropped)."""
    rows = substitute.jacobian_rows(current.X, current.y)
    X_new = np.clip(current.X + lambda_rho * np.sign(rows), 0.0, 1.0)
    dropped = 0
    if deduplicate:
        X_new, dropped = _dedup(X_new, current.X)
    return _append_labeled(current, X_new, oracle), dropped


def reservoir_select_indices(n: int, kappa: int, rng) -> np.ndarray:
    """Uniform selection of kappa source indices out of n (Vitter's Algorithm R).

    Returned in reservoir-slot order: slot i starts as index i and each later
    index i replaces slot r (drawn uniformly from 0..i) when r < kappa, giving
    every index the same kappa/n selection probability."""
    if kappa > n:
        raise DataSizeError(f"cannot select {kappa} of {n} indices")
    slots = list(range(kappa))
    for i in range(kappa, n):
        r = int(rng.integers(0, i + 1))
        if r < kappa:
            slots[r] = i
    return np.asarray(slots, dtype=np.int64)


def reservoir_augment(
    substitute: Model,
    current: Dataset,
    oracle: OracleHandle,
    lambda_rho: float,
    kappa: int,
    rng,
    deduplicate: bool = False,
) -> tuple[Dataset, int]:
    """Augment exactly kappa uniformly-selected points instead of all of them.

    Falls back to full augmentation when kappa exceeds the current set size.
    """
    if kappa > len(current):
        return jacobian_augment(substitute, current, oracle, lambda_rho, deduplicate)
    sources = reservoir_select_indices(len(current), kappa, rng)
    rows = substitute.jacobian_rows(current.X[sources], current.y[sources])
    X_new = np.clip(current.X[sources] + lambda_rho * np.sign(rows), 0.0, 1.0)
    dropped = 0
    if deduplicate:
        X_new, dropped = _dedup(X_new, current.X)
    return _append_labeled(current, X_new, oracle), dropped


def svm_augment(
    substitute: LinearSvm,
    current: Dataset,
    oracle: OracleHandle,
    lam: float,
    deduplicate: bool = False,
) -> tuple[Dataset, int, int]:
    """SVM-specific augmentation: step each point toward the decision boundary
    of the subclassifier for its oracle label, x - lam * w[label]/||w[label]||.

    Points whose label hyperplane has zero norm are skipped (counted). Returns
    (augmented set, zero-norm skips, duplicates dropped)."""
    if not isinstance(substitute, LinearSvm):
        raise UnsupportedFamilyError("svm_augment needs a linear SVM substitute")
    w = substitute.weights[current.y]
    norms = np.linalg.norm(w, axis=1)
    usable = norms > 0.0
    skipped = int((~usable).sum())
    X_new = np.clip(
        current.X[usable] - lam * w[usable] / norms[usable, None], 0.0, 1.0
    )
    dropped = 0
    if deduplicate:
        X_new, dropped = _dedup(X_new, current.X)
    return _append_labeled(current, X_new, oracle), skipped, dropped


def _reference_labels(oracle_like, X: np.ndarray) -> np.ndarray:
    if isinstance(oracle_like, OracleHandle):
        return np.asarray(oracle_like.measure_batch(X))
    if isinstance(oracle_like, Model):
        return np.atleast_1d(oracle_like.predict(X))
    raise TypeError(f"cannot take reference labels from {type(oracle_like).__name__}")


def agreement(model_a: Model, oracle, probe_X) -> float:
    """Fraction of probe inputs on which model_a's label matches the oracle's."""
    probe_X = np.asarray(probe_X, dtype=np.float64)
    if len(probe_X) == 0:
        raise DataSizeError("agreement needs a non-empty probe set")
    return float(np.mean(np.atleast_1d(model_a.predict(probe_X)) == _reference_labels(oracle, probe_X)))


def train_substitute(oracle: OracleHandle, heldout: Dataset, config: SubstituteConfig) -> SubstituteState:
    """Run the full augmentation loop against a label-only oracle.

    The first `initial_set_size` held-out inputs seed the training set; the
    remainder is the agreement probe set (measured through the oracle's
    uncounted channel when it has one). Iteration rho trains a fresh
    substitute on S_rho, then augments to S_{rho+1}: a full Jacobian step
    while producing S_{rho+1} with rho+1 <= sigma (or in vanilla mode),
    reservoir sampling afterwards, and the hyperplane rule for SVM
    substitutes. After rho_max augmentations a final substitute is trained on
    everything labeled, so the oracle counter ends at exactly
    query_count(n, sigma, kappa, rho_max, use_reservoir). On budget
    exhaustion the state so far is returned, flagged.
    """
    n = config.initial_set_size
    if len(heldout) <= n:
        raise DataSizeError(
            f"held-out set of {len(heldout)} cannot seed {n} inputs and a probe set"
        )
    seed_X = heldout.X[:n]
    probe_X = heldout.X[n:]
    rng = np.random.default_rng(config.seed)
    try:
        probe_labels = oracle.measure_batch(probe_X)
    except Exception:
        probe_labels = None

    state = SubstituteState(
        model=None,
        training_set=None,
        rho=-1,
        metrics=[],
        queries_used=0,
    )

    def measure(model) -> float | None:
        if probe_labels is None:
            return None
        return float(np.mean(model.predict(probe_X) == probe_labels))

    try:
        labels = oracle.query_batch(seed_X)
    except BudgetExceededError:
        state.budget_exhausted = True
        state.queries_used = oracle.queries_made
        return state
    current = Dataset(seed_X, labels, heldout.num_classes)

    for rho in range(config.rho_max + 1):
        model = train(config.family, current, config.hyperparams, seed=(config.seed, rho))
        state.model = model
        state.training_set = current
        state.rho = rho
        state.queries_used = oracle.queries_made
        state.metrics.append(
            IterationMetrics(rho, len(current), oracle.queries_made, measure(model))
        )
        if rho == config.rho_max:
            break
        lam_rho = step_size(config.lam, config.tau, rho) if config.use_pss else config.lam
        try:
            if config.family == "svm":
                current, skipped, dropped = svm_augment(
                    model, current, oracle, lam_rho, config.deduplicate
                )
                state.zero_norm_skips += skipped
            elif config.use_reservoir and (rho + 1) > config.sigma:
                current, dropped = reservoir_augment(
                    model, current, oracle, lam_rho, config.kappa, rng, config.deduplicate
                )
            else:
                current, dropped = jacobian_augment(
                    model, current, oracle, lam_rho, config.deduplicate
                )
            state.duplicates_dropped += dropped
        except BudgetExceededError:
            state.budget_exhausted = True
            state.queries_used = oracle.queries_made
            break

    state.queries_used = oracle.queries_made
    return state
