"""Experiment orchestration: benchmark runs, partitioning, sweeps, reports.

Every run is driven by one JSON config document that is echoed verbatim into
its outputs. Repetition and cell seeds derive from (base seed, cell key,
repetition index), so a worker pool can schedule cells in any order without
changing a single number.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import stats

from . import metrics as metrics_mod
from .data import SeriesDataset
from .diagnostics import local_mle, separation_points
from .metrics import MetricReport, binarize, find_threshold, fl_acc, pearson
from .plasticity import ip_pretrain
from .pso import Dimension, SearchSpace, decode_position, optimize
from .readout import ReadoutWeights, beta_sweep, harvest_states, predict
from .reservoir import HyperParameters, ReservoirWeights, TopologyGrid, init_weights
from .rng import derive_seed
from .serialize import hyperparameters_from_dict, hyperparameters_to_dict, model_to_dict
from .tasks import build_datasets, is_binary_task

logger = logging.getLogger(__name__)

WORKERS_ENV = "ESNGRID_WORKERS"

# layer counts used by the neuron-budget study
PARTITION_LAYER_SET = tuple(range(1, 13)) + (16, 24, 25, 32, 36, 48, 49, 64)


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        return f"[{self.stage}] {super().__str__()}"


@dataclass
class ExperimentConfig:
    """One experiment. Exactly one of ``topology`` (fixed run), ``partition``
    (neuron-budget study), or ``sweep`` (hyperparameter grid) must be set."""

    task: str
    data: dict = field(default_factory=dict)
    hyperparameters: dict = field(default_factory=dict)
    topology: dict | None = None
    partition: dict | None = None
    sweep: dict | None = None
    search_space: list[dict] | None = None
    pso: dict = field(default_factory=dict)
    seed: int = 0
    repetitions: int = 10
    seeds: list[int] | None = None
    lambda_max_steps: int | None = 500
    label: str | None = None
    output_dir: str | None = None

    def __post_init__(self):
        modes = [m is not None for m in (self.topology, self.partition, self.sweep)]
        if sum(modes) != 1:
            raise ValueError("exactly one of topology, partition, or sweep must be configured")
        if self.search_space is not None and self.topology is None:
            raise ValueError("a search space requires a fixed-topology run")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def echo(self) -> dict:
        return dataclasses.asdict(self)

    def repetition_seeds(self) -> list[int]:
        if self.seeds is not None:
            return list(self.seeds)
        return [derive_seed(self.seed, "rep", r) for r in range(self.repetitions)]

    def build_hp(self, **overrides) -> HyperParameters:
        base = hyperparameters_from_dict(self.hyperparameters)
        return replace(base, **overrides) if overrides else base

    def build_topology(self) -> TopologyGrid:
        return TopologyGrid.grid(int(self.topology["breadth"]), int(self.topology["depth"]))


@dataclass
class ResultRecord:
    """Outcome of one experiment: config echo, per-repetition reports, and
    mean / 95% CI summaries."""

    config_echo: dict
    repetitions: list[dict]
    summary: dict
    chosen_betas: list[float]
    wall_clock_s: float

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "config": self.config_echo,
            "repetitions": self.repetitions,
            "summary": self.summary,
            "chosen_betas": self.chosen_betas,
        }
        if include_timing:
            d["wall_clock_s"] = self.wall_clock_s
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2)


def mean_ci(values) -> tuple[float, float]:
    """Sample mean and Student-t 95% confidence half-width."""
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if arr.size == 0:
        return float("nan"), float("nan")
    if arr.size == 1:
        return float(arr[0]), 0.0
    half = float(stats.t.ppf(0.975, arr.size - 1) * arr.std(ddof=1) / np.sqrt(arr.size))
    return float(arr.mean()), half


def _validation_scorer(binary: bool):
    if not binary:
        return metrics_mod.nrmse

    def score(y_true, y_raw):
        theta = find_threshold(y_raw, y_true)
        return fl_acc(y_true, binarize(y_raw, theta))

    score.higher_is_better = True
    return score


def evaluate_once(
    train: SeriesDataset,
    val: SeriesDataset,
    test: SeriesDataset,
    topology: TopologyGrid,
    hp: HyperParameters,
    seed: int,
    binary: bool = False,
    lambda_max_steps: int | None = 500,
    return_artifacts: bool = False,
):
    """Train and score one network: build weights, pre-train plasticity,
    harvest, pick the regularizer on validation, evaluate on test."""
    n_inputs = train.sequences[0][0].shape[1]
    weights = init_weights(topology, hp, n_inputs, seed)
    if hp.ip.epochs > 0:
        weights = ip_pretrain(weights, [u for u, _ in train.sequences], hp, washout=train.washout)

    x_train, y_train = harvest_states(weights, hp, train.sequences, train.washout)
    x_val, y_val = harvest_states(weights, hp, val.sequences, val.washout)
    beta, readout, val_score = beta_sweep(
        x_train.values, y_train, x_val.values, y_val, hp.beta_candidates, _validation_scorer(binary)
    )

    x_test, y_test = harvest_states(weights, hp, test.sequences, test.washout)
    raw = predict(x_test.values, readout)
    threshold = None
    if binary:
        threshold = find_threshold(predict(x_train.values, readout), y_train)
        accuracy = fl_acc(y_test, binarize(raw, threshold))
    else:
        accuracy = None
    try:
        mape_value = metrics_mod.mape(y_test, raw)
    except ValueError:
        mape_value = None
    report = MetricReport(
        rmse=metrics_mod.rmse(y_test, raw),
        nrmse=metrics_mod.nrmse(y_test, raw),
        mape=mape_value,
        fl_acc=accuracy,
        threshold=threshold,
    )
    if lambda_max_steps == 0:
        lam = None  # diagnostics disabled for this run
    else:
        lam = local_mle(
            weights, hp, [u for u, _ in val.sequences], washout=val.washout, max_steps=lambda_max_steps
        )
    result = {
        "seed": seed,
        "metrics": report.to_dict(),
        "beta": beta,
        "lambda_max": lam,
        "val_score": val_score,
    }
    if return_artifacts:
        return result, _Artifacts(weights, hp, readout, threshold, x_test, y_test)
    return result


@dataclass
class _Artifacts:
    weights: ReservoirWeights
    hp: HyperParameters
    readout: ReadoutWeights
    threshold: float | None
    x_test: object
    y_test: np.ndarray


def summarize(repetitions: list[dict]) -> dict:
    summary = {}
    for key in ("rmse", "nrmse", "mape", "fl_acc"):
        values = [r["metrics"].get(key) for r in repetitions]
        if all(v is None for v in values):
            continue
        mean, ci = mean_ci(values)
        summary[key] = {"mean": mean, "ci95": ci}
    lams = [r["lambda_max"] for r in repetitions]
    if any(v is not None for v in lams):
        mean, ci = mean_ci(lams)
        summary["lambda_max"] = {"mean": mean, "ci95": ci}
    return summary


def build_search_space(spec_list: list[dict]) -> SearchSpace:
    return SearchSpace(tuple(Dimension(**d) for d in spec_list))


def default_search_space(include_topology: bool = False, n_reservoir: tuple[int, int] | None = None):
    """Search dimensions covering the usual operating range. The ridge
    regularizer is deliberately absent: it is swept from the harvested states
    inside every evaluation."""
    dims = [
        Dimension("spectral_radius", 0.1, 1.5),
        Dimension("leak", 0.05, 1.0),
        Dimension("input_norm", -2.0, 1.0, log10=True),
        Dimension("feedforward_norm", -2.0, 1.0, log10=True),
        Dimension("input_sparsity", 0.0, 0.95),
        Dimension("feedforward_sparsity", 0.0, 0.95),
        Dimension("recurrent_sparsity", 0.0, 0.95),
    ]
    if n_reservoir is not None:
        dims.append(Dimension("n_reservoir", float(n_reservoir[0]), float(n_reservoir[1]), kind="integer"))
    if include_topology:
        dims += [
            Dimension("breadth", 1.0, 4.0, kind="integer"),
            Dimension("depth", 1.0, 4.0, kind="integer"),
        ]
    return SearchSpace(tuple(dims))


def apply_assignment(topology: TopologyGrid, hp: HyperParameters, assignment: dict):
    """Merge a decoded search-space assignment into (topology, hp)."""
    assignment = dict(assignment)
    breadth = assignment.pop("breadth", topology.breadth)
    depth = assignment.pop("depth", topology.depth)
    if (breadth, depth) != (topology.breadth, topology.depth):
        topology = TopologyGrid.grid(int(breadth), int(depth))
    if assignment:
        hp = replace(hp, **assignment)
    return topology, hp


def build_pso_objective(
    train: SeriesDataset,
    val: SeriesDataset,
    space: SearchSpace,
    topology: TopologyGrid,
    hp: HyperParameters,
    seed: int,
    binary: bool,
):
    """Validation-score objective for the swarm. Sees only the train and
    validation splits; the test split never enters the search."""
    scorer = _validation_scorer(binary)
    higher = bool(getattr(scorer, "higher_is_better", False))

    def objective(position) -> float:
        assignment = decode_position(space, position)
        topo, cand = apply_assignment(topology, hp, assignment)
        n_inputs = train.sequences[0][0].shape[1]
        weights = init_weights(topo, cand, n_inputs, seed)
        if cand.ip.epochs > 0:
            weights = ip_pretrain(weights, [u for u, _ in train.sequences], cand, washout=train.washout)
        x_train, y_train = harvest_states(weights, cand, train.sequences, train.washout)
        x_val, y_val = harvest_states(weights, cand, val.sequences, val.washout)
        _, _, score = beta_sweep(
            x_train.values, y_train, x_val.values, y_val, cand.beta_candidates, scorer
        )
        return -score if higher else score

    return objective


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ResultRecord:
    """Fixed-topology benchmark run: data -> (optional) swarm search on the
    validation split -> repetitions -> persisted record."""
    t0 = time.perf_counter()
    try:
        train, val, test = build_datasets(config.task, config.data)
    except Exception as exc:
        raise StageError("data", str(exc)) from exc
    binary = is_binary_task(config.task)
    topology = config.build_topology()
    hp = config.build_hp()

    pso_payload = None
    if config.search_space:
        try:
            space = build_search_space(config.search_space)
            objective = build_pso_objective(
                train, val, space, topology, hp, derive_seed(config.seed, "pso-eval"), binary
            )
            best_pos, best_score, trace = optimize(
                objective,
                space,
                iterations=int(config.pso.get("iterations", 20)),
                n_particles=int(config.pso.get("particles", 16)),
                inertia=float(config.pso.get("inertia", 0.9)),
                cognitive=float(config.pso.get("cognitive", 0.5)),
                social=float(config.pso.get("social", 0.3)),
                seed=derive_seed(config.seed, "pso"),
                checkpoint_path=config.pso.get("checkpoint"),
            )
            assignment = decode_position(space, best_pos)
            topology, hp = apply_assignment(topology, hp, assignment)
            pso_payload = {"best_assignment": assignment, "best_score": best_score, "trace": trace}
            logger.info("swarm search settled on %s (score %.6g)", assignment, best_score)
        except StageError:
            raise
        except Exception as exc:
            raise StageError("pso", str(exc)) from exc

    repetitions = []
    artifacts = None
    for r, seed in enumerate(config.repetition_seeds()):
        try:
            if r == 0:
                rep, artifacts = evaluate_once(
                    train, val, test, topology, hp, seed, binary, config.lambda_max_steps,
                    return_artifacts=True,
                )
            else:
                rep = evaluate_once(
                    train, val, test, topology, hp, seed, binary, config.lambda_max_steps
                )
        except Exception as exc:
            _flush_partial(config, repetitions, pso_payload)
            raise StageError("evaluate", f"repetition {r} (seed {seed}): {exc}") from exc
        repetitions.append(rep)

    record = ResultRecord(
        config_echo=config.echo(),
        repetitions=repetitions,
        summary=summarize(repetitions),
        chosen_betas=[r["beta"] for r in repetitions],
        wall_clock_s=time.perf_counter() - t0,
    )
    if config.output_dir:
        try:
            persist_record(config, record, artifacts, pso_payload)
        except Exception as exc:
            raise StageError("persist", str(exc)) from exc
    return record


def _flush_partial(config, repetitions, pso_payload):
    if not config.output_dir:
        return
    try:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        payload = {"config": config.echo(), "repetitions": repetitions, "pso": pso_payload}
        (out / "partial.json").write_text(json.dumps(payload, sort_keys=True, indent=2))
    except OSError:
        logger.exception("could not flush partial outputs")


def persist_record(config, record: ResultRecord, artifacts: _Artifacts | None, pso_payload=None):
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "result.json").write_text(record.to_json())
    (out / "result.csv").write_text(repetitions_csv(record))
    if pso_payload is not None:
        (out / "pso_trace.json").write_text(json.dumps(pso_payload, sort_keys=True, indent=2))
    if artifacts is not None:
        model = model_to_dict(
            weights=artifacts.weights,
            hp=artifacts.hp,
            readout=artifacts.readout,
            threshold=artifacts.threshold,
            extra={"task": config.task},
        )
        (out / "model.json").write_text(json.dumps(model, sort_keys=True))
        _write_separation_csv(out / "separation_points.csv", artifacts)


def _write_separation_csv(path: Path, artifacts: _Artifacts):
    values = artifacts.x_test.values
    n_u = artifacts.weights.n_inputs
    cloud = separation_points(values[:, :n_u], values[:, n_u:], max_pairs=2000, seed=0)
    lines = ["input_sep,output_sep"]
    lines += [f"{p.input_sep:.9g},{p.output_sep:.9g}" for p in cloud.points]
    path.write_text("\n".join(lines) + "\n")


def repetitions_csv(record: ResultRecord) -> str:
    lines = ["repetition,seed,rmse,nrmse,mape,fl_acc,beta,lambda_max"]
    for i, rep in enumerate(record.repetitions):
        m = rep["metrics"]
        cells = [
            str(i),
            str(rep["seed"]),
            _num(m.get("rmse")),
            _num(m.get("nrmse")),
            _num(m.get("mape")),
            _num(m.get("fl_acc")),
            _num(rep.get("beta")),
            _num(rep.get("lambda_max")),
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _num(v) -> str:
    return "" if v is None else f"{v:.9g}"


def factor_pairs(n_layers: int) -> list[tuple[int, int]]:
    """All (depth, breadth) integer factorizations of ``n_layers``,
    ascending by depth."""
    if n_layers < 1:
        raise ValueError("layer count must be positive")
    return [(d, n_layers // d) for d in range(1, n_layers + 1) if n_layers % d == 0]


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, workers)


_DATASET_CACHE: dict[str, tuple] = {}


def _cached_datasets(task: str, data_opts: dict):
    key = json.dumps([task, data_opts], sort_keys=True)
    if key not in _DATASET_CACHE:
        _DATASET_CACHE[key] = build_datasets(task, data_opts)
    return _DATASET_CACHE[key]


def _run_cell(payload: dict) -> dict:
    """Evaluate one (topology, hyperparameters) cell over its repetitions.

    Module-level and dict-driven so worker processes can run it; all seeds
    derive from (base seed, cell key, repetition index).
    """
    train, val, test = _cached_datasets(payload["task"], payload["data"])
    topology = TopologyGrid.grid(payload["breadth"], payload["depth"])
    hp = hyperparameters_from_dict(payload["hyperparameters"])
    binary = is_binary_task(payload["task"])
    reps = []
    for r in range(payload["repetitions"]):
        seed = derive_seed(payload["seed"], "cell", payload["key"], "rep", r)
        reps.append(
            evaluate_once(train, val, test, topology, hp, seed, binary, payload["lambda_max_steps"])
        )
    nrmse_mean, nrmse_ci = mean_ci([r["metrics"]["nrmse"] for r in reps])
    lambda_mean, _ = mean_ci([r["lambda_max"] for r in reps])
    return {
        "key": payload["key"],
        "nrmse_mean": nrmse_mean,
        "nrmse_ci": nrmse_ci,
        "lambda_max": lambda_mean,
        "repetitions": reps,
    }


def _map_cells(payloads: list[dict], workers: int) -> list[dict | Exception]:
    results: list = []
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, p) for p in payloads]
            for fut in futures:
                try:
                    results.append(fut.result())
                except Exception as exc:  # cell failures must not sink the run
                    results.append(exc)
    else:
        for p in payloads:
            try:
                results.append(_run_cell(p))
            except Exception as exc:
                results.append(exc)
    return results


def neuronal_partitioning(config: ExperimentConfig, workers: int | None = None) -> list[dict]:
    """Neuron-budget study: spread ``budget`` neurons over every factor pair
    of every layer count; each cell trains with the configured scalar
    hyperparameters and reports mean NRMSE and the stability exponent."""
    part = config.partition or {}
    budget = int(part["budget"])
    layer_values = [int(v) for v in part.get("n_layers", PARTITION_LAYER_SET)]
    if budget < max(layer_values):
        raise ValueError(f"budget {budget} below the largest layer count {max(layer_values)}")

    payloads = []
    for n_layers in layer_values:
        n_reservoir = budget // n_layers
        for depth, breadth in factor_pairs(n_layers):
            payloads.append(
                {
                    "task": config.task,
                    "data": config.data,
                    "key": f"L{n_layers}/D{depth}xB{breadth}",
                    "breadth": breadth,
                    "depth": depth,
                    "hyperparameters": {**config.hyperparameters, "n_reservoir": n_reservoir},
                    "repetitions": config.repetitions,
                    "seed": config.seed,
                    "lambda_max_steps": config.lambda_max_steps,
                    "n_layers": n_layers,
                    "n_reservoir": n_reservoir,
                }
            )
    rows = []
    for payload, outcome in zip(payloads, _map_cells(payloads, resolve_workers(workers))):
        if isinstance(outcome, Exception):
            logger.warning("skipping cell %s: %s", payload["key"], outcome)
            continue
        rows.append(
            {
                "n_layers": payload["n_layers"],
                "depth": payload["depth"],
                "breadth": payload["breadth"],
                "n_reservoir": payload["n_reservoir"],
                "nrmse_mean": outcome["nrmse_mean"],
                "nrmse_ci": outcome["nrmse_ci"],
                "lambda_max": outcome["lambda_max"],
            }
        )
    if config.output_dir:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "partition.csv").write_text(partition_csv(rows))
        (out / "partition.json").write_text(json.dumps({"config": config.echo(), "rows": rows}, sort_keys=True, indent=2))
    return rows


def partition_csv(rows: list[dict]) -> str:
    lines = ["n_layers,depth,breadth,n_reservoir,nrmse_mean,nrmse_ci,lambda_max"]
    for r in rows:
        lines.append(
            f"{r['n_layers']},{r['depth']},{r['breadth']},{r['n_reservoir']},"
            f"{_num(r['nrmse_mean'])},{_num(r['nrmse_ci'])},{_num(r['lambda_max'])}"
        )
    return "\n".join(lines) + "\n"


def param_sweep(config: ExperimentConfig, workers: int | None = None) -> tuple[list[dict], float | None]:
    """Train at every (parameter value, breadth, depth) cell and report NRMSE
    and the stability exponent per cell, plus their correlation across cells."""
    sw = config.sweep or {}
    parameter = sw["parameter"]
    if parameter not in {f.name for f in dataclasses.fields(HyperParameters)}:
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    values = [float(v) for v in sw["values"]]
    if not values:
        raise ValueError("sweep needs at least one value")
    grid = [(int(b), int(d)) for b, d in sw.get("grid", [[1, 1]])]

    payloads = []
    for value in values:
        for breadth, depth in grid:
            payloads.append(
                {
                    "task": config.task,
                    "data": config.data,
                    "key": f"{parameter}={value:g}/B{breadth}xD{depth}",
                    "breadth": breadth,
                    "depth": depth,
                    "hyperparameters": {**config.hyperparameters, parameter: value},
                    "repetitions": config.repetitions,
                    "seed": config.seed,
                    "lambda_max_steps": config.lambda_max_steps,
                    "value": value,
                }
            )
    rows = []
    for payload, outcome in zip(payloads, _map_cells(payloads, resolve_workers(workers))):
        if isinstance(outcome, Exception):
            logger.warning("missing cell %s: %s", payload["key"], outcome)
            continue
        rows.append(
            {
                "parameter": parameter,
                "value": payload["value"],
                "breadth": payload["breadth"],
                "depth": payload["depth"],
                "nrmse_mean": outcome["nrmse_mean"],
                "nrmse_ci": outcome["nrmse_ci"],
                "lambda_max": outcome["lambda_max"],
            }
        )
    correlation = None
    if len(rows) >= 2:
        try:
            correlation = pearson([r["lambda_max"] for r in rows], [r["nrmse_mean"] for r in rows])
        except ValueError:
            logger.warning("correlation undefined over the sweep cells")
    if config.output_dir:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(sweep_csv(rows))
        (out / "sweep.json").write_text(
            json.dumps(
                {"config": config.echo(), "rows": rows, "pearson_lambda_nrmse": correlation},
                sort_keys=True,
                indent=2,
            )
        )
    return rows, correlation


def sweep_csv(rows: list[dict]) -> str:
    lines = ["parameter,value,breadth,depth,nrmse_mean,nrmse_ci,lambda_max"]
    for r in rows:
        lines.append(
            f"{r['parameter']},{r['value']:g},{r['breadth']},{r['depth']},"
            f"{_num(r['nrmse_mean'])},{_num(r['nrmse_ci'])},{_num(r['lambda_max'])}"
        )
    return "\n".join(lines) + "\n"


def _thousandths(value: float | None) -> str:
    return "" if value is None else f"{value * 1000.0:.4g}"


def report_rows(records: list[ResultRecord]) -> tuple[list[str], list[list[str]]]:
    """Comparison-table cells; (N)RMSE and the error fraction behind MAPE are
    rendered in thousandths, frame accuracy as a percentage."""
    header = ["label", "rmse", "nrmse", "mape", "fl_acc"]
    body = []
    for rec in records:
        label = rec.config_echo.get("label") or rec.config_echo.get("task", "run")
        s = rec.summary
        mape_mean = s.get("mape", {}).get("mean")
        body.append(
            [
                str(label),
                _thousandths(s.get("rmse", {}).get("mean")),
                _thousandths(s.get("nrmse", {}).get("mean")),
                _thousandths(mape_mean / 100.0 if mape_mean is not None else None),
                "" if "fl_acc" not in s else f"{s['fl_acc']['mean'] * 100.0:.2f}%",
            ]
        )
    return header, body


def emit_report(records: list[ResultRecord], fmt: str) -> str:
    """Render records as ``csv``, ``json``, or ``markdown-table`` text."""
    if not records:
        raise ValueError("no records to report")
    if fmt == "json":
        return json.dumps([r.to_dict() for r in records], sort_keys=True, indent=2)
    header, body = report_rows(records)
    if fmt == "csv":
        return "\n".join([",".join(header)] + [",".join(row) for row in body]) + "\n"
    if fmt == "markdown-table":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(row) + " |" for row in body]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
