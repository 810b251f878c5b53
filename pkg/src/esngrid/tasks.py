"""Benchmark task assembly: datasets, washouts, and split conventions.

Each task builds (train, val, test) datasets from its raw source:

* ``mackey``    - generated chaotic series, 84-step-ahead, washout 100,
                  splits 6400/1600/2000 (the series is generated long enough
                  to honor them exactly).
* ``melbourne`` - daily minimum temperature CSV, 5-step trailing smoothing,
                  1-step-ahead, washout 30, splits 2336/584/730 shrunk
                  proportionally to the pairs that actually exist. Without a
                  CSV a synthetic surrogate with similar structure is used.
* ``pianomidi`` - binary piano rolls, per-piece next-step prediction,
                  washout 20. Requires the corpus container file.
* ``custom-csv``- any date,value CSV with explicit horizon/splits/washout.
"""

from __future__ import annotations

import logging
from pathlib import Path

from .data import (
    SeriesDataset,
    fit_split_sizes,
    load_csv_series,
    load_pianoroll,
    mackey_glass,
    make_forecast_dataset,
    moving_average,
    split_series,
    synthetic_daily_temps,
)

logger = logging.getLogger(__name__)

TASKS = ("mackey", "melbourne", "pianomidi", "custom-csv")

MACKEY_DEFAULTS = dict(
    dt=0.1, delay=17.0, production=0.2, decay=0.1, exponent=10.0, history_value=1.2
)
MACKEY_SPLITS = (6400, 1600, 2000)
MACKEY_HORIZON = 84
MACKEY_WASHOUT = 100

MELBOURNE_SPLITS = (2336, 584, 730)
MELBOURNE_WINDOW = 5
MELBOURNE_WASHOUT = 30

PIANO_WASHOUT = 20


def build_datasets(task: str, options: dict) -> tuple[SeriesDataset, SeriesDataset, SeriesDataset]:
    """Resolve a task name plus options into (train, val, test) datasets."""
    options = dict(options or {})
    if task == "mackey":
        return _mackey(options)
    if task == "melbourne":
        return _melbourne(options)
    if task == "pianomidi":
        return _pianomidi(options)
    if task == "custom-csv":
        return _custom_csv(options)
    raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")


def is_binary_task(task: str) -> bool:
    return task == "pianomidi"


def _mackey(options: dict):
    splits = tuple(options.get("splits", MACKEY_SPLITS))
    horizon = int(options.get("horizon", MACKEY_HORIZON))
    washout = int(options.get("washout", MACKEY_WASHOUT))
    params = {k: options[k] for k in MACKEY_DEFAULTS if k in options}
    n_steps = int(options.get("n_steps", sum(splits) + horizon))
    series = mackey_glass(n_steps, **{**MACKEY_DEFAULTS, **params})
    u, y = make_forecast_dataset(series, horizon)
    sizes = fit_split_sizes(splits, u.shape[0])
    return split_series(u, y, sizes, washout=washout, horizon=horizon)


def _melbourne(options: dict):
    path = options.get("path")
    if path and Path(path).exists():
        series = load_csv_series(path)
    else:
        if path:
            raise FileNotFoundError(f"temperature CSV not found: {path}")
        logger.warning("no temperature CSV configured; using the synthetic surrogate series")
        series = synthetic_daily_temps(
            n_days=int(options.get("surrogate_days", 3650)),
            seed=int(options.get("surrogate_seed", 19)),
        )
    window = int(options.get("smoothing_window", MELBOURNE_WINDOW))
    if window > 1:
        series = moving_average(series, window)
    horizon = int(options.get("horizon", 1))
    washout = int(options.get("washout", MELBOURNE_WASHOUT))
    u, y = make_forecast_dataset(series, horizon)
    sizes = fit_split_sizes(tuple(options.get("splits", MELBOURNE_SPLITS)), u.shape[0])
    return split_series(u, y, sizes, washout=washout, horizon=horizon)


def _pianomidi(options: dict):
    path = options.get("path")
    if not path:
        raise FileNotFoundError("pianomidi task needs data.path pointing at the roll container")
    rolls = load_pianoroll(path)
    washout = int(options.get("washout", PIANO_WASHOUT))
    out = []
    for split, pieces in (("train", rolls.train), ("val", rolls.valid), ("test", rolls.test)):
        seqs = [(piece[:-1].astype(float), piece[1:].astype(float)) for piece in pieces if len(piece) > 1]
        out.append(SeriesDataset(seqs, split=split, washout=washout, horizon=1))
    return tuple(out)


def _custom_csv(options: dict):
    path = options.get("path")
    if not path:
        raise FileNotFoundError("custom-csv task needs data.path")
    series = load_csv_series(path)
    window = int(options.get("smoothing_window", 1))
    if window > 1:
        series = moving_average(series, window)
    horizon = int(options.get("horizon", 1))
    washout = int(options.get("washout", 0))
    u, y = make_forecast_dataset(series, horizon)
    if "splits" in options:
        sizes = fit_split_sizes(tuple(options["splits"]), u.shape[0])
    else:
        n = u.shape[0]
        sizes = (int(n * 0.64), int(n * 0.16), n - int(n * 0.64) - int(n * 0.16))
    return split_series(u, y, sizes, washout=washout, horizon=horizon)
