"""Command-line entry points for data generation and experiment runs."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .data import mackey_glass, synthetic_daily_temps
from .harness import (
    ExperimentConfig,
    ResultRecord,
    StageError,
    emit_report,
    neuronal_partitioning,
    param_sweep,
    resolve_workers,
    run_experiment,
)
from .metrics import MetricReport, binarize, find_threshold, fl_acc
from . import metrics as metrics_mod
from .readout import harvest_states, predict
from .serialize import load_model
from .tasks import build_datasets, is_binary_task


def _write_series_csv(path: str, values: np.ndarray, name: str):
    lines = [f"step,{name}"] + [f"{i},{v:.12g}" for i, v in enumerate(values)]
    Path(path).write_text("\n".join(lines) + "\n")


def _cmd_generate(args) -> int:
    if args.dataset == "mackey":
        series = mackey_glass(
            n_steps=args.steps,
            dt=args.dt,
            delay=args.delay,
            production=args.production,
            decay=args.decay,
            exponent=args.exponent,
            history_value=args.history,
        )
        _write_series_csv(args.out, series, "value")
    else:  # temps
        series = synthetic_daily_temps(n_days=args.steps, seed=args.seed)
        _write_series_csv(args.out, series, "temperature")
    print(f"wrote {len(series)} values to {args.out}")
    return 0


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config)
    if getattr(args, "out", None):
        config.output_dir = args.out
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    return config


def _cmd_train(args) -> int:
    config = _load_config(args)
    if config.search_space is not None:
        raise StageError("config", "config has a search_space; use the pso-search subcommand")
    record = run_experiment(config, workers=resolve_workers(args.workers))
    print(record.to_json())
    return 0


def _cmd_pso_search(args) -> int:
    config = _load_config(args)
    if config.search_space is None:
        raise StageError("config", "pso-search needs a search_space in the config")
    record = run_experiment(config, workers=resolve_workers(args.workers))
    print(record.to_json())
    return 0


def _cmd_evaluate(args) -> int:
    weights, hp, readout, threshold = load_model(args.model)
    config = ExperimentConfig.from_file(args.config)
    train, val, test = build_datasets(config.task, config.data)
    dataset = {"train": train, "val": val, "test": test}[args.split]
    x, y = harvest_states(weights, hp, dataset.sequences, dataset.washout)
    raw = predict(x.values, readout)
    if is_binary_task(config.task):
        theta = threshold if threshold is not None else find_threshold(raw, y)
        accuracy = fl_acc(y, binarize(raw, theta))
    else:
        theta, accuracy = None, None
    try:
        mape_value = metrics_mod.mape(y, raw)
    except ValueError:
        mape_value = None
    report = MetricReport(
        rmse=metrics_mod.rmse(y, raw),
        nrmse=metrics_mod.nrmse(y, raw),
        mape=mape_value,
        fl_acc=accuracy,
        threshold=theta,
    )
    print(json.dumps({"split": args.split, "metrics": report.to_dict()}, sort_keys=True, indent=2))
    return 0


def _cmd_partition(args) -> int:
    config = _load_config(args)
    if config.partition is None:
        raise StageError("config", "partition subcommand needs a partition block in the config")
    rows = neuronal_partitioning(config, workers=resolve_workers(args.workers))
    print(f"{len(rows)} cells evaluated" + (f"; outputs in {config.output_dir}" if config.output_dir else ""))
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    if config.sweep is None:
        raise StageError("config", "sweep subcommand needs a sweep block in the config")
    rows, correlation = param_sweep(config, workers=resolve_workers(args.workers))
    msg = f"{len(rows)} cells evaluated"
    if correlation is not None:
        msg += f"; pearson(lambda_max, nrmse) = {correlation:.4f}"
    print(msg)
    return 0


def _cmd_report(args) -> int:
    records = []
    for path in args.records:
        raw = json.loads(Path(path).read_text())
        records.append(
            ResultRecord(
                config_echo=raw["config"],
                repetitions=raw["repetitions"],
                summary=raw["summary"],
                chosen_betas=raw.get("chosen_betas", []),
                wall_clock_s=raw.get("wall_clock_s", 0.0),
            )
        )
    text = emit_report(records, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esngrid", description="Reservoir-grid forecasting toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate benchmark series to CSV")
    gen.add_argument("dataset", choices=("mackey", "temps"))
    gen.add_argument("--steps", type=int, default=10_000)
    gen.add_argument("--dt", type=float, default=0.1)
    gen.add_argument("--delay", type=float, default=17.0)
    gen.add_argument("--production", type=float, default=0.2)
    gen.add_argument("--decay", type=float, default=0.1)
    gen.add_argument("--exponent", type=float, default=10.0)
    gen.add_argument("--history", type=float, default=1.2)
    gen.add_argument("--seed", type=int, default=19)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    def experiment_args(p):
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="base seed (overrides config)")
        p.add_argument("--workers", type=int, default=None, help=f"worker count (or ${'{'}ESNGRID_WORKERS{'}'})")

    train = sub.add_parser("train", help="train and evaluate a fixed configuration")
    experiment_args(train)
    train.set_defaults(func=_cmd_train)

    search = sub.add_parser("pso-search", help="swarm-search hyperparameters, then train")
    experiment_args(search)
    search.set_defaults(func=_cmd_pso_search)

    ev = sub.add_parser("evaluate", help="evaluate a saved model on a task split")
    ev.add_argument("--model", required=True)
    ev.add_argument("--config", required=True)
    ev.add_argument("--split", choices=("train", "val", "test"), default="test")
    ev.set_defaults(func=_cmd_evaluate)

    part = sub.add_parser("partition", help="neuron-budget partitioning study")
    experiment_args(part)
    part.set_defaults(func=_cmd_partition)

    sweep = sub.add_parser("sweep", help="hyperparameter sweep over a topology grid")
    experiment_args(sweep)
    sweep.set_defaults(func=_cmd_sweep)

    rep = sub.add_parser("report", help="format result records as a comparison table")
    rep.add_argument("--records", nargs="+", required=True, help="result.json files")
    rep.add_argument("--format", choices=("csv", "json", "markdown-table"), default="markdown-table")
    rep.add_argument("--out")
    rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"[error] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
