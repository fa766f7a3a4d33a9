"""Command-line entry point.

Subcommands: train, craft, transfer-matrix, learn-substitute, blackbox-attack,
serve-oracle. Every run accepts --seed and --config (a JSON file of flag
defaults). Exit codes: 0 success, 2 validation error, 3 budget exhausted,
4 transport error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import textio
from .crafting import CRAFT_METHODS, craft_batch
from .data import Dataset, load_csv, load_idx, split_disjoint, synthetic_digits
from .errors import AdvTransferError, DataFormatError
from .evaluation import (
    blackbox_attack,
    cross_matrix,
    emit_report,
    intra_matrix,
)
from .models import FAMILIES, accuracy, load_model, save_model, train
from .oracle import LocalOracle, RemoteOracle
from .server import OracleServer
from .substitute import SubstituteConfig

SYNTHETIC_DEFAULTS = dict(train=10000, test=2000, dim=64, classes=10, seed=7)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="seed for this run")
    parser.add_argument("--config", default=None, help="JSON file of flag defaults")


def _add_synthetic_knobs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--synthetic-train", type=int, default=SYNTHETIC_DEFAULTS["train"])
    parser.add_argument("--synthetic-test", type=int, default=SYNTHETIC_DEFAULTS["test"])
    parser.add_argument("--synthetic-dim", type=int, default=SYNTHETIC_DEFAULTS["dim"])
    parser.add_argument("--synthetic-classes", type=int, default=SYNTHETIC_DEFAULTS["classes"])
    parser.add_argument("--synthetic-seed", type=int, default=SYNTHETIC_DEFAULTS["seed"])


def resolve_dataset(spec: str, args) -> Dataset:
    """Turn a data spec into a Dataset.

    Specs: ``synthetic:train`` / ``synthetic:test`` (deterministic fixture),
    ``csv:PATH``, ``idx:IMAGES,LABELS``.
    """
    if spec.startswith("synthetic"):
        part = spec.split(":", 1)[1] if ":" in spec else "train"
        if part not in ("train", "test"):
            raise DataFormatError(f"synthetic part must be train or test, got {part!r}")
        train_set, test_set = synthetic_digits(
            getattr(args, "synthetic_train", SYNTHETIC_DEFAULTS["train"]),
            getattr(args, "synthetic_test", SYNTHETIC_DEFAULTS["test"]),
            dim=getattr(args, "synthetic_dim", SYNTHETIC_DEFAULTS["dim"]),
            num_classes=getattr(args, "synthetic_classes", SYNTHETIC_DEFAULTS["classes"]),
            seed=getattr(args, "synthetic_seed", SYNTHETIC_DEFAULTS["seed"]),
        )
        return train_set if part == "train" else test_set
    if spec.startswith("csv:"):
        return load_csv(spec[len("csv:") :])
    if spec.startswith("idx:"):
        paths = spec[len("idx:") :].split(",")
        if len(paths) != 2:
            raise DataFormatError("idx spec must be idx:IMAGES,LABELS")
        return load_idx(paths[0], paths[1])
    raise DataFormatError(f"unknown data spec {spec!r}")


def resolve_oracle(args) -> LocalOracle | RemoteOracle:
    spec = args.oracle
    budget = getattr(args, "budget", None)
    if spec.startswith("local:"):
        return LocalOracle(load_model(spec[len("local:") :]), budget=budget)
    if spec.startswith("http"):
        url = spec if spec.startswith("http://") or spec.startswith("https://") else (
            "http://" + spec.split(":", 1)[1].lstrip("/")
        )
        reference = getattr(args, "reference_model", None)
        return RemoteOracle(
            url,
            budget=budget,
            reference_model=load_model(reference) if reference else None,
        )
    raise DataFormatError(f"oracle spec must be local:FILE or http:URL, got {spec!r}")


def _substitute_config(args) -> SubstituteConfig:
    return SubstituteConfig(
        family=args.family,
        lam=args.lmbda,
        tau=args.tau,
        sigma=args.sigma,
        kappa=args.kappa,
        rho_max=args.rho_max,
        initial_set_size=args.initial_set_size,
        seed=args.seed,
        use_pss=args.pss,
        use_reservoir=args.reservoir,
    )


def _add_substitute_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=("net", "logreg", "svm"), default="logreg")
    parser.add_argument("--pss", action=argparse.BooleanOptionalAction, default=True)
    parser.add_argument("--reservoir", action=argparse.BooleanOptionalAction, default=True)
    parser.add_argument("--sigma", type=int, default=3)
    parser.add_argument("--kappa", type=int, default=400)
    parser.add_argument("--lambda", dest="lmbda", type=float, default=0.1)
    parser.add_argument("--tau", type=int, default=3)
    parser.add_argument("--rho-max", type=int, default=10)
    parser.add_argument("--initial-set-size", type=int, default=100)
    parser.add_argument("--budget", type=int, default=None)
    parser.add_argument("--reference-model", default=None,
                        help="local copy of the served model, for uncounted metrics")


def cmd_train(args) -> int:
    dataset = resolve_dataset(args.data, args)
    model = train(args.family, dataset, seed=args.seed)
    if args.eval_data:
        heldout = resolve_dataset(args.eval_data, args)
        print(f"{args.family}: test accuracy {accuracy(model, heldout):.4f}")
    save_model(model, args.out)
    print(f"saved {args.family} model to {args.out}")
    return 0


def cmd_craft(args) -> int:
    model = load_model(args.model)
    dataset = resolve_dataset(args.data, args)
    result = craft_batch(model, dataset, args.method, args.epsilon)
    payload = {
        "method": result.method,
        "epsilon": result.epsilon,
        "mean_l1_fraction": result.mean_l1_fraction,
        "source_misclassification": result.source_misclassification,
        "records": [
            {
                "x": [float(v) for v in r.x],
                "x_adv": [float(v) for v in r.x_adv],
                "l1_fraction": r.perturbation.l1_fraction,
                "linf": r.perturbation.linf,
                "source_pred": r.source_pred,
                "adv_pred": r.adv_pred,
                "true_label": r.true_label,
                "crafted": r.crafted,
            }
            for r in result.records
        ],
    }
    with open(args.out, "w") as fh:
        fh.write(textio.dumps(payload))
    print(
        f"crafted {len(result)} samples ({result.method}, eps={result.epsilon}): "
        f"source misclassification {result.source_misclassification:.4f}, "
        f"mean L1 fraction {result.mean_l1_fraction:.4f}"
    )
    return 0


def cmd_transfer_matrix(args) -> int:
    craft_set = resolve_dataset(args.craft_data, args)
    if args.which == "intra":
        full = resolve_dataset(args.data, args)
        parts = split_disjoint(full, args.part_size, args.parts)
        report = intra_matrix(args.family, parts, craft_set, epsilon=args.epsilon, seed=args.seed)
    else:
        full = resolve_dataset(args.data, args)
        models = {family: train(family, full, seed=(args.seed, i))
                  for i, family in enumerate(FAMILIES)}
        report = cross_matrix(models, craft_set, seed=args.seed)
    emit_report(report, args.out)
    for label, row in zip(report.row_labels, report.rates):
        cells = "  ".join(f"{v:6.4f}" for v in row)
        print(f"{label:>10}  {cells}")
    print(f"report written to {args.out}")
    return 0


def cmd_learn_substitute(args) -> int:
    oracle = resolve_oracle(args)
    heldout = resolve_dataset(args.data, args)
    config = _substitute_config(args)
    from .substitute import train_substitute

    state = train_substitute(oracle, heldout, config)
    print("rho  set_size  queries  agreement")
    for m in state.metrics:
        agr = "-" if m.agreement is None else f"{m.agreement:.4f}"
        print(f"{m.rho:>3}  {m.set_size:>8}  {m.queries:>7}  {agr}")
    if state.budget_exhausted:
        print("budget exhausted; partial state")
    if args.out:
        rows = [
            {"rho": m.rho, "set_size": m.set_size, "queries": m.queries, "agreement": m.agreement}
            for m in state.metrics
        ]
        with open(args.out, "w") as fh:
            fh.write(textio.dumps({"iterations": rows, "queries_used": state.queries_used}))
    return 0


def cmd_blackbox_attack(args) -> int:
    oracle = resolve_oracle(args)
    heldout = resolve_dataset(args.data, args)
    config = _substitute_config(args)
    report, _state = blackbox_attack(oracle, config, args.epsilon, heldout)
    if args.out:
        emit_report(report, args.out)
    rate = (
        "unavailable"
        if report.misclassification_rate is None
        else f"{report.misclassification_rate:.4f}"
    )
    print(
        f"substitute {report.substitute_family}, {report.queries_used} oracle queries, "
        f"oracle misclassification on crafted inputs: {rate}"
    )
    return 3 if report.budget_exhausted else 0


def cmd_serve_oracle(args) -> int:
    model = load_model(args.model)
    host, _, port = args.bind.rpartition(":")
    server = OracleServer(
        (host or "127.0.0.1", int(port)), model,
        budget=args.budget, latency_ms=args.latency_ms,
    )
    host, port = server.server_address[:2]
    print(f"serving {args.model} on http://{host}:{port} (POST /predict)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advtransfer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model family")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--data", default="synthetic:train")
    p.add_argument("--eval-data", default=None)
    p.add_argument("--out", required=True)
    _add_synthetic_knobs(p)
    _add_common(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("craft", help="craft adversarial samples against a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=CRAFT_METHODS, required=True)
    p.add_argument("--epsilon", type=float, default=0.3)
    p.add_argument("--in", dest="data", default="synthetic:test")
    p.add_argument("--out", required=True)
    _add_synthetic_knobs(p)
    _add_common(p)
    p.set_defaults(handler=cmd_craft)

    p = sub.add_parser("transfer-matrix", help="intra- or cross-technique study")
    p.add_argument("which", choices=("intra", "cross"))
    p.add_argument("--family", choices=FAMILIES, default="logreg",
                   help="family for the intra study")
    p.add_argument("--data", default="synthetic:train")
    p.add_argument("--craft-data", default="synthetic:test")
    p.add_argument("--part-size", type=int, default=2000)
    p.add_argument("--parts", type=int, default=5)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--out", required=True)
    _add_synthetic_knobs(p)
    _add_common(p)
    p.set_defaults(handler=cmd_transfer_matrix)

    p = sub.add_parser("learn-substitute", help="train a substitute against an oracle")
    p.add_argument("--oracle", required=True, help="local:MODELFILE or http:URL")
    p.add_argument("--data", default="synthetic:test", help="held-out inputs (seeds + probe)")
    p.add_argument("--out", default=None)
    _add_substitute_flags(p)
    _add_synthetic_knobs(p)
    _add_common(p)
    p.set_defaults(handler=cmd_learn_substitute)

    p = sub.add_parser("blackbox-attack", help="substitute training plus transfer attack")
    p.add_argument("--oracle", required=True)
    p.add_argument("--data", default="synthetic:test")
    p.add_argument("--epsilon", type=float, default=0.3)
    p.add_argument("--out", default=None)
    _add_substitute_flags(p)
    _add_synthetic_knobs(p)
    _add_common(p)
    p.set_defaults(handler=cmd_blackbox_attack)

    p = sub.add_parser("serve-oracle", help="serve a model file as an HTTP oracle")
    p.add_argument("--model", required=True)
    p.add_argument("--bind", default="127.0.0.1:8300")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--latency-ms", type=float, default=0.0)
    _add_common(p)
    p.set_defaults(handler=cmd_serve_oracle)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args, _ = _parse_with_config(parser, argv)
    try:
        return args.handler(args)
    except AdvTransferError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _parse_with_config(parser, argv):
    """Apply --config file values as defaults, then parse for real."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            overrides = json.load(fh)
        if not isinstance(overrides, dict):
            raise SystemExit("config file must hold a JSON object")
        parser.set_defaults(**overrides)
        args = parser.parse_args(argv)
    return args, parser


if __name__ == "__main__":
    sys.exit(main())
