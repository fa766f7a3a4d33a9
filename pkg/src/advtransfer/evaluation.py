"""Transferability matrices, the end-to-end black-box attack, and report files.

Matrix cells follow the misclassification convention of the studies (fraction
of crafted samples the target labels differently from the true label); the
prediction-change variant (target flips between x and x*) is computed and
stored alongside, since both framings are useful. Reports serialize
deterministically: fixed key order, rates at 6 decimals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import textio
from .crafting import CraftResult, craft_batch, method_for_family
from .data import Dataset
from .errors import DataConsistencyError, DataFormatError, DataSizeError
from .models import FAMILIES, Ensemble, Model, train
from .oracle import OracleHandle
from .substitute import SubstituteConfig, SubstituteState, train_substitute

REPORT_FLOAT_FMT = "%.6f"

# input-variation defaults: the intra study drives each model to quasi-complete
# self-misclassification, the cross study equalizes perturbation magnitudes
INTRA_EPSILONS = {"fgsm": 0.3, "svm": 1.5, "tree": 0.0}
CROSS_EPSILONS = {"fgsm": 0.25, "svm": 5.0, "tree": 0.0}

PART_NAMES = ("A", "B", "C", "D", "E")


def _r6(value) -> float:
    return round(float(value), 6)


def transfer_rate(records, target_model: Model, mode: str = "misclassification") -> float:
    """Rate over crafted records, normalized by the number of inputs.

    mode "prediction_change": fraction with target(x) != target(x*);
    mode "misclassification": fraction with target(x*) != true label.
    """
    if isinstance(records, CraftResult):
        records = records.records
    if not records:
        raise DataSizeError("transfer_rate needs at least one crafted record")
    X = np.stack([r.x for r in records])
    X_adv = np.stack([r.x_adv for r in records])
    adv_preds = target_model.predict(X_adv)
    if mode == "prediction_change":
        return float(np.mean(target_model.predict(X) != adv_preds))
    if mode == "misclassification":
        truth = np.array([r.true_label for r in records])
        return float(np.mean(adv_preds != truth))
    raise ValueError(f"unknown transfer mode {mode!r}")


@dataclass(frozen=True)
class TransferReport:
    """Matrix of transfer rates plus per-row crafting metadata."""

    kind: str
    row_labels: list[str]
    col_labels: list[str]
    rates: list[list[float]]
    rates_prediction_change: list[list[float]]
    row_metadata: list[dict]
    num_inputs: int
    seed: int | None = None

    def __post_init__(self):
        rows, cols = len(self.row_labels), len(self.col_labels)
        for matrix in (self.rates, self.rates_prediction_change):
            if len(matrix) != rows or any(len(r) != cols for r in matrix):
                raise DataConsistencyError("matrix shape does not match labels")
            if any(not 0.0 <= v <= 1.0 for row in matrix for v in row):
                raise DataConsistencyError("rates must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "report": "transfer",
            "kind": self.kind,
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "rates": [list(r) for r in self.rates],
            "rates_prediction_change": [list(r) for r in self.rates_prediction_change],
            "row_metadata": [dict(m) for m in self.row_metadata],
            "num_inputs": self.num_inputs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransferReport":
        return cls(
            kind=d["kind"],
            row_labels=list(d["row_labels"]),
            col_labels=list(d["col_labels"]),
            rates=[list(r) for r in d["rates"]],
            rates_prediction_change=[list(r) for r in d["rates_prediction_change"]],
            row_metadata=[dict(m) for m in d["row_metadata"]],
            num_inputs=d["num_inputs"],
            seed=d["seed"],
        )

    def column_means(self) -> list[float]:
        return [float(np.mean([row[j] for row in self.rates])) for j in range(len(self.col_labels))]


def _craft_rows(models: list[tuple[str, Model]], craft_set: Dataset, eps_by_method: dict):
    crafted = []
    for label, model in models:
        method = method_for_family(model.family)
        crafted.append((label, model, craft_batch(model, craft_set, method, eps_by_method[method])))
    return crafted


def _evaluate_matrix(crafted, targets: list[Model]):
    rates, flips, metadata = [], [], []
    for label, _model, result in crafted:
        rates.append([_r6(transfer_rate(result, t, "misclassification")) for t in targets])
        flips.append([_r6(transfer_rate(result, t, "prediction_change")) for t in targets])
        metadata.append(
            {
                "source": label,
                "method": result.method,
                "epsilon": _r6(result.epsilon),
                "mean_l1_fraction": _r6(result.mean_l1_fraction),
                "source_misclassification": _r6(result.source_misclassification),
            }
        )
    return rates, flips, metadata


def intra_matrix(
    family: str,
    parts: list[Dataset],
    craft_set: Dataset,
    epsilon: float | None = None,
    hyperparams=None,
    seed: int = 0,
) -> TransferReport:
    """5x5 intra-technique study: models trained on disjoint parts, cell (i, j)
    is the rate at which samples crafted on model i are misclassified by model j."""
    method = method_for_family(family)
    eps = INTRA_EPSILONS[method] if epsilon is None else epsilon
    labels = [f"{family}-{PART_NAMES[i] if i < len(PART_NAMES) else i}" for i in range(len(parts))]
    models = [
        (labels[i], train(family, part, hyperparams, seed=(seed, i)))
        for i, part in enumerate(parts)
    ]
    crafted = _craft_rows(models, craft_set, {method: eps})
    rates, flips, metadata = _evaluate_matrix(crafted, [m for _, m in models])
    return TransferReport(
        kind="intra",
        row_labels=labels,
        col_labels=labels,
        rates=rates,
        rates_prediction_change=flips,
        row_metadata=metadata,
        num_inputs=len(craft_set),
        seed=seed,
    )


def cross_matrix(
    models_by_family: dict[str, Model],
    craft_set: Dataset,
    eps_config: dict | None = None,
    seed: int | None = None,
) -> TransferReport:
    """5x6 cross-technique study: rows craft on each family, columns evaluate on
    the five families plus their majority-vote ensemble (no ensemble row)."""
    missing = [f for f in FAMILIES if f not in models_by_family]
    if missing:
        raise DataConsistencyError(f"missing models for families: {missing}")
    eps_by_method = dict(CROSS_EPSILONS)
    if eps_config:
        eps_by_method.update(eps_config)
    sources = [(family, models_by_family[family]) for family in FAMILIES]
    ensemble = Ensemble([models_by_family[f] for f in FAMILIES])
    targets = [models_by_family[f] for f in FAMILIES] + [ensemble]
    crafted = _craft_rows(sources, craft_set, eps_by_method)
    rates, flips, metadata = _evaluate_matrix(crafted, targets)
    return TransferReport(
        kind="cross",
        row_labels=list(FAMILIES),
        col_labels=list(FAMILIES) + ["ensemble"],
        rates=rates,
        rates_prediction_change=flips,
        row_metadata=metadata,
        num_inputs=len(craft_set),
        seed=seed,
    )


@dataclass(frozen=True)
class BlackboxAttackReport:
    """Outcome of the substitute-train-then-transfer attack on an oracle."""

    substitute_family: str
    craft_method: str
    epsilon: float
    rho_max: int
    use_pss: bool
    use_reservoir: bool
    sigma: int
    kappa: int
    seed: int
    queries_used: int
    iterations: list[dict]
    misclassification_rate: float | None
    baseline_error_rate: float | None
    num_probe: int
    budget_exhausted: bool

    def to_dict(self) -> dict:
        return {
            "report": "blackbox-attack",
            "substitute_family": self.substitute_family,
            "craft_method": self.craft_method,
            "epsilon": _r6(self.epsilon),
            "rho_max": self.rho_max,
            "use_pss": self.use_pss,
            "use_reservoir": self.use_reservoir,
            "sigma": self.sigma,
            "kappa": self.kappa,
            "seed": self.seed,
            "queries_used": self.queries_used,
            "iterations": [dict(row) for row in self.iterations],
            "misclassification_rate": self.misclassification_rate,
            "baseline_error_rate": self.baseline_error_rate,
            "num_probe": self.num_probe,
            "budget_exhausted": self.budget_exhausted,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BlackboxAttackReport":
        fields = {k: v for k, v in d.items() if k != "report"}
        fields["iterations"] = [dict(row) for row in fields["iterations"]]
        return cls(**fields)


def blackbox_attack(
    oracle: OracleHandle,
    substitute_config: SubstituteConfig,
    craft_epsilon: float,
    heldout: Dataset,
) -> tuple[BlackboxAttackReport, SubstituteState]:
    """Train a substitute against the oracle, craft on it over the probe set,
    and measure how often the oracle misclassifies the results.

    ``queries_used`` is the oracle counter right after substitute training;
    the misclassification measurement itself goes through the uncounted
    channel when the oracle has one, otherwise through counted queries made
    after the snapshot.
    """
    state = train_substitute(oracle, heldout, substitute_config)
    queries_snapshot = state.queries_used
    probe = heldout.subset(np.arange(substitute_config.initial_set_size, len(heldout)))

    misclassification = baseline = None
    method = "svm" if substitute_config.family == "svm" else "fgsm"
    if state.model is not None:
        result = craft_batch(state.model, probe, method, craft_epsilon)
        X_adv = np.stack([r.x_adv for r in result.records])
        try:
            adv_labels = oracle.measure_batch(X_adv)
            clean_labels = oracle.measure_batch(probe.X)
        except Exception:
            adv_labels = oracle.query_batch(X_adv)
            clean_labels = oracle.query_batch(probe.X)
        misclassification = _r6(np.mean(adv_labels != probe.y))
        baseline = _r6(np.mean(clean_labels != probe.y))

    report = BlackboxAttackReport(
        substitute_family=substitute_config.family,
        craft_method=method,
        epsilon=craft_epsilon,
        rho_max=substitute_config.rho_max,
        use_pss=substitute_config.use_pss,
        use_reservoir=substitute_config.use_reservoir,
        sigma=substitute_config.sigma,
        kappa=substitute_config.kappa,
        seed=substitute_config.seed,
        queries_used=queries_snapshot,
        iterations=[
            {
                "rho": m.rho,
                "set_size": m.set_size,
                "queries": m.queries,
                "agreement": None if m.agreement is None else _r6(m.agreement),
            }
            for m in state.metrics
        ],
        misclassification_rate=misclassification,
        baseline_error_rate=baseline,
        num_probe=len(probe),
        budget_exhausted=state.budget_exhausted,
    )
    return report, state


_REPORT_TYPES = {"transfer": TransferReport, "blackbox-attack": BlackboxAttackReport}


def emit_report(report, path, fmt: str = "json") -> None:
    """Write a report deterministically (fixed key order, 6-decimal rates)."""
    if fmt != "json":
        raise DataFormatError(f"unknown report format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(textio.dumps(report.to_dict(), float_fmt=REPORT_FLOAT_FMT))


def load_report(path):
    with open(path) as fh:
        d = json.load(fh)
    kind = d.get("report")
    if kind not in _REPORT_TYPES:
        raise DataFormatError(f"{path}: not a report file")
    return _REPORT_TYPES[kind].from_dict(d)
