"""Command line entry points: simulate, evaluate, pipeline.

Exit codes: 0 success, 2 config error, 3 data or schema error,
4 runtime error. Set VANETLAB_LOG=DEBUG|INFO|WARNING|ERROR for verbosity.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys

from .classifiers import KINDS, as_arrays, make
from .config import ScenarioConfig, derived_seed, sample_scenario
from .dataset import (
    DATASET_HEADER,
    Dataset,
    FLOWS_HEADER,
    SplitSpec,
    balance,
    label_flows,
    read_csv,
    read_flows_csv,
    split,
    write_csv,
    write_flows_csv,
)
from .errors import (
    ConfigError,
    InsufficientClassCount,
    SchemaError,
    SingleClassDataset,
    SingleClassTraining,
    SingleClassTruth,
    TooFewRows,
    VanetlabError,
)
from .metrics import evaluate_scores
from .scenario import run_scenario

log = logging.getLogger("vanetlab.cli")

# derived_seed purposes
SPLIT_SEED = 301
BALANCE_SEED = 302
MODEL_SEED = 303


def _setup_logging() -> None:
    level = os.environ.get("VANETLAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    return ScenarioConfig.from_dict(raw)


def config_digest(cfg: ScenarioConfig) -> str:
    canonical = json.dumps(cfg.to_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def run_sweep(cfg: ScenarioConfig):
    """All scenarios in index order; (records, per-scenario manifest rows)."""
    records = []
    meta = []
    for i in range(cfg.scenario_count):
        params = sample_scenario(cfg, i)
        log.info(
            "scenario %d: %d vehicles, %d blackholes",
            i, params.vehicles, len(params.blackholes),
        )
        result = run_scenario(params)
        positive = sum(1 for r in result.records if r.blackhole_absorbed >= 1)
        meta.append(
            {
                "index": i,
                "vehicles": params.vehicles,
                "blackholes": list(params.blackholes),
                "flows": len(result.records),
                "positive": positive,
                "negative": len(result.records) - positive,
            }
        )
        records.extend(result.records)
    return records, meta


def _write_json(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_any_dataset(path: str) -> Dataset:
    """Accept either a flows table or an already-labeled dataset."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
    if header == FLOWS_HEADER:
        return label_flows(read_flows_csv(path), {"source": str(path)})
    if header == DATASET_HEADER:
        return read_csv(path)
    raise SchemaError(f"{path}: header is neither a flows nor a dataset table")


def _model_for(kind: str, seed: int):
    if kind == "RF":
        return make("RF", seed=derived_seed(seed, MODEL_SEED))
    return make(kind)


def train_and_report(
    ds: Dataset,
    seed: int,
    split_fraction: float,
    stratified: bool,
    balance_counts,
    report_path: str,
    roc_path: str,
) -> dict:
    if balance_counts is not None:
        ds = balance(ds, balance_counts[0], balance_counts[1], derived_seed(seed, BALANCE_SEED))
    positive, negative = ds.class_counts()
    if positive == 0 or negative == 0:
        raise SingleClassDataset(
            f"evaluation needs both classes, got {positive} positive / {negative} negative"
        )
    train, test = split(
        ds, SplitSpec(split_fraction, derived_seed(seed, SPLIT_SEED), stratified)
    )
    X_train, y_train = as_arrays(train)
    X_test, y_test = as_arrays(test)

    report = {
        "seed": seed,
        "split_fraction": split_fraction,
        "rows": {"train": len(train.rows), "test": len(test.rows)},
        "class_counts": {
            "dataset": {"positive": positive, "negative": negative},
            "train": {
                "positive": int(y_train.sum()),
                "negative": int(len(y_train) - y_train.sum()),
            },
            "test": {
                "positive": int(y_test.sum()),
                "negative": int(len(y_test) - y_test.sum()),
            },
        },
        "classifiers": {},
    }
    roc_lines = ["classifier,fpr,tpr"]
    for kind in KINDS:
        log.info("training %s on %d rows", kind, len(train.rows))
        model = _model_for(kind, seed).fit(X_train, y_train)
        pred = model.predict(X_test)
        scores = model.score(X_test)
        rep = evaluate_scores(list(pred), list(scores), list(y_test))
        c = rep.counts
        swapped = c.swapped()
        report["classifiers"][kind] = {
            "confusion": {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn},
            "confusion_normal_positive": {
                "tp": swapped.tp, "fp": swapped.fp, "tn": swapped.tn, "fn": swapped.fn,
            },
            "accuracy": rep.accuracy,
            "sensitivity": rep.sensitivity,
            "ppv": rep.ppv,
            "npv": rep.npv,
            "f1": rep.f1,
            "degenerate": rep.degenerate,
            "auc": rep.auc,
            "single_point_auc": rep.single_point_auc,
        }
        for fpr, tpr in rep.roc_points:
            roc_lines.append(f"{kind},{fpr!r},{tpr!r}")

    _write_json(report, report_path)
    with open(roc_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(roc_lines) + "\n")
    return report


def cmd_simulate(config_path: str, out_path: str) -> dict:
    cfg = load_config(config_path)
    records, meta = run_sweep(cfg)
    write_flows_csv(records, out_path)
    positive = sum(1 for r in records if r.blackhole_absorbed >= 1)
    manifest = {
        "config": cfg.to_dict(),
        "config_sha256": config_digest(cfg),
        "scenarios": meta,
        "outputs": {"flows": os.path.basename(out_path)},
        "class_counts": {"positive": positive, "negative": len(records) - positive},
    }
    manifest_path = os.path.join(os.path.dirname(os.path.abspath(out_path)), "manifest.json")
    _write_json(manifest, manifest_path)
    return manifest


def cmd_evaluate(
    dataset_path: str,
    split_fraction: float,
    seed: int,
    report_path: str,
    roc_path: str,
    balance_counts=None,
) -> dict:
    ds = _load_any_dataset(dataset_path)
    return train_and_report(
        ds, seed, split_fraction, False, balance_counts, report_path, roc_path
    )


def cmd_pipeline(config_path: str, out_dir: str) -> dict:
    cfg = load_config(config_path)
    os.makedirs(out_dir, exist_ok=True)
    records, meta = run_sweep(cfg)
    write_flows_csv(records, os.path.join(out_dir, "flows.csv"))

    ds = label_flows(records, {"seed": cfg.seed, "scenarios": cfg.scenario_count})
    raw_positive, raw_negative = ds.class_counts()
    if cfg.balance is not None:
        ds = balance(ds, cfg.balance[0], cfg.balance[1], derived_seed(cfg.seed, BALANCE_SEED))
    write_csv(ds, os.path.join(out_dir, "dataset.csv"))

    report = train_and_report(
        ds,
        cfg.seed,
        cfg.split_fraction,
        cfg.stratified_split,
        None,
        os.path.join(out_dir, "report.json"),
        os.path.join(out_dir, "roc.csv"),
    )
    positive, negative = ds.class_counts()
    manifest = {
        "config": cfg.to_dict(),
        "config_sha256": config_digest(cfg),
        "scenarios": meta,
        "outputs": {
            "flows": "flows.csv",
            "dataset": "dataset.csv",
            "report": "report.json",
            "roc": "roc.csv",
        },
        "class_counts": {
            "raw": {"positive": raw_positive, "negative": raw_negative},
            "dataset": {"positive": positive, "negative": negative},
        },
    }
    _write_json(manifest, os.path.join(out_dir, "manifest.json"))
    return report


def _parse_balance(text: str):
    try:
        pos, neg = text.split(":")
        return (int(pos), int(neg))
    except ValueError:
        raise ConfigError(f"--balance expects POS:NEG, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vanetlab",
        description="Blackhole-attack traffic laboratory: simulate, label, classify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the scenario sweep, write flows.csv")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)

    p_eval = sub.add_parser("evaluate", help="train and score the six classifiers")
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--split", type=float, default=0.6)
    p_eval.add_argument("--seed", type=int, default=1729)
    p_eval.add_argument("--report", required=True)
    p_eval.add_argument("--roc", required=True)
    p_eval.add_argument("--balance", default=None)

    p_pipe = sub.add_parser("pipeline", help="simulate, label, balance, evaluate")
    p_pipe.add_argument("--config", required=True)
    p_pipe.add_argument("--out-dir", required=True)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cmd_simulate(args.config, args.out)
        elif args.command == "evaluate":
            if not 0.0 < args.split < 1.0:
                raise ConfigError(f"--split must lie in (0, 1), got {args.split}")
            if args.seed < 0 or args.seed > 0xFFFFFFFFFFFFFFFF:
                raise ConfigError("--seed must fit in 64 bits")
            balance_counts = _parse_balance(args.balance) if args.balance else None
            cmd_evaluate(
                args.dataset, args.split, args.seed, args.report, args.roc, balance_counts
            )
        else:
            cmd_pipeline(args.config, args.out_dir)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (
        SchemaError,
        TooFewRows,
        InsufficientClassCount,
        SingleClassDataset,
        SingleClassTraining,
        SingleClassTruth,
        OSError,
    ) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except VanetlabError as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
