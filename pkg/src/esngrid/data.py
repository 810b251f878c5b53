"""Benchmark data: chaotic series generation, loaders, and forecast pairs."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import substream

N_KEYS = 88
LOWEST_PITCH = 21  # MIDI note of the lowest piano key


@dataclass
class SeriesDataset:
    """One split of a forecasting task: (inputs, targets) sequences plus the
    washout and horizon they were built with."""

    sequences: list[tuple[np.ndarray, np.ndarray]]
    split: str
    washout: int
    horizon: int

    @property
    def n_rows(self) -> int:
        return sum(u.shape[0] for u, _ in self.sequences)


@dataclass
class PianoRollDataset:
    """Binary 88-key piano rolls, one (N_t, 88) matrix per piece."""

    train: list[np.ndarray]
    valid: list[np.ndarray]
    test: list[np.ndarray]

    def split(self, name: str) -> list[np.ndarray]:
        return {"train": self.train, "valid": self.valid, "val": self.valid, "test": self.test}[name]


def mackey_glass(
    n_steps: int,
    dt: float = 0.1,
    delay: float = 17.0,
    production: float = 0.2,
    decay: float = 0.1,
    exponent: float = 10.0,
    history_value: float = 1.2,
) -> np.ndarray:
    """Integrate the delayed production/decay flow
    dx/dt = production * x(t - delay) / (1 + x(t - delay)^exponent) - decay * x(t)
    with classical fourth-order Runge-Kutta at step ``dt``.

    The delayed term reads a buffer of past grid values, linearly interpolated
    at the half-step stages; history for t <= 0 is the constant
    ``history_value``. Returns the ``n_steps`` values at t = dt .. n_steps*dt.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if delay < 0:
        raise ValueError("delay must be nonnegative")
    if 0.0 < delay < dt:
        raise ValueError("delay must be zero or at least dt")

    def flow(x, x_delayed):
        return production * x_delayed / (1.0 + x_delayed**exponent) - decay * x

    if delay == 0.0:
        x = history_value
        out = np.empty(n_steps)
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(n_steps):
                k1 = flow(x, x)
                k2 = flow(x + 0.5 * dt * k1, x + 0.5 * dt * k1)
                k3 = flow(x + 0.5 * dt * k2, x + 0.5 * dt * k2)
                k4 = flow(x + dt * k3, x + dt * k3)
                x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if not math.isfinite(x):
                    raise RuntimeError(f"integration diverged at step {k}")
                out[k] = x
        return out

    lag = delay / dt  # >= 1 by the precondition
    n_hist = math.ceil(lag)
    # values[i] holds x at t = (i - n_hist) * dt; history fills t <= 0
    values = np.empty(n_hist + 1 + n_steps)
    values[: n_hist + 1] = history_value

    def delayed(float_index: float) -> float:
        lo = math.floor(float_index)
        frac = float_index - lo
        if frac == 0.0:
            return values[lo]
        return (1.0 - frac) * values[lo] + frac * values[lo + 1]

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            cur = n_hist + k
            x = values[cur]
            xd_0 = delayed(cur - lag)
            xd_half = delayed(cur + 0.5 - lag)
            xd_1 = delayed(cur + 1.0 - lag)
            k1 = flow(x, xd_0)
            k2 = flow(x + 0.5 * dt * k1, xd_half)
            k3 = flow(x + 0.5 * dt * k2, xd_half)
            k4 = flow(x + dt * k3, xd_1)
            nxt = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not math.isfinite(nxt):
                raise RuntimeError(f"integration diverged at step {k} (t = {(k + 1) * dt:g})")
            values[cur + 1] = nxt
    return values[n_hist + 1 :]


def load_csv_series(path: str | Path) -> np.ndarray:
    """Read a date,value CSV (header row required) into a value array.

    Malformed or blank rows are reported with their line number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1:
                continue  # header
            if not row or all(not cell.strip() for cell in row):
                raise ValueError(f"{path}:{line_no}: blank line")
            if len(row) < 2:
                raise ValueError(f"{path}:{line_no}: expected date,value")
            try:
                values.append(float(row[1].strip().strip('"')))
            except ValueError:
                raise ValueError(f"{path}:{line_no}: unparseable value {row[1]!r}") from None
    if not values:
        raise ValueError(f"{path}: no data rows")
    return np.array(values)


def moving_average(series: np.ndarray, window: int) -> np.ndarray:
    """Trailing moving average; output length is len(series) - window + 1."""
    series = np.asarray(series, dtype=float)
    if window < 1:
        raise ValueError("window must be at least 1")
    if window > series.shape[0]:
        raise ValueError(f"window {window} exceeds series length {series.shape[0]}")
    if window == 1:
        return series.copy()
    kernel = np.full(window, 1.0 / window)
    return np.convolve(series, kernel, mode="valid")


def make_forecast_dataset(series: np.ndarray, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Input/target pairs with target(t) = input(t + horizon)."""
    series = np.asarray(series, dtype=float)
    if series.ndim == 1:
        series = series[:, None]
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if horizon >= series.shape[0]:
        raise ValueError(f"horizon {horizon} leaves no pairs in a series of length {series.shape[0]}")
    return series[:-horizon], series[horizon:]


def fit_split_sizes(requested: tuple[int, int, int], available: int) -> tuple[int, int, int]:
    """Shrink split sizes proportionally when fewer pairs exist than asked
    for (largest-remainder rounding; leftover rows go to the training split)."""
    total = sum(requested)
    if total <= available:
        return tuple(requested)
    scale = available / total
    scaled = [r * scale for r in requested]
    floors = [int(s) for s in scaled]
    leftover = available - sum(floors)
    order = sorted(range(3), key=lambda i: scaled[i] - floors[i], reverse=True)
    for i in order[:leftover]:
        floors[i] += 1
    return tuple(floors)


def split_series(
    u: np.ndarray,
    y: np.ndarray,
    sizes: tuple[int, int, int],
    washout: int = 0,
    horizon: int = 1,
) -> tuple[SeriesDataset, SeriesDataset, SeriesDataset]:
    """Contiguous chronological train/validation/test split of one pair
    sequence (no shuffling)."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    if u.shape[0] != y.shape[0]:
        raise ValueError("inputs and targets disagree on length")
    n_train, n_val, n_test = sizes
    if min(sizes) < 0:
        raise ValueError("split sizes must be nonnegative")
    if sum(sizes) > u.shape[0]:
        raise ValueError(f"split sizes {sizes} oversubscribe {u.shape[0]} available pairs")
    if n_val == 0 or n_test == 0:
        warnings.warn("empty validation or test split", stacklevel=2)
    bounds = (0, n_train, n_train + n_val, n_train + n_val + n_test)
    out = []
    for name, lo, hi in zip(("train", "val", "test"), bounds, bounds[1:]):
        seqs = [(u[lo:hi], y[lo:hi])] if hi > lo else []
        out.append(SeriesDataset(seqs, split=name, washout=washout, horizon=horizon))
    return tuple(out)


def load_pianoroll(path: str | Path) -> PianoRollDataset:
    """Load the documented piano-roll container: a JSON object with keys
    train/valid/test, each a list of pieces, each piece a list of timesteps,
    each timestep a list of active MIDI pitches (21..108)."""
    path = Path(path)
    with open(path) as fh:
        raw = json.load(fh)
    for key in ("train", "valid", "test"):
        if key not in raw:
            raise ValueError(f"{path}: missing split {key!r}")

    def to_rolls(pieces, split):
        rolls = []
        for p_idx, piece in enumerate(pieces):
            roll = np.zeros((len(piece), N_KEYS), dtype=np.uint8)
            for t, notes in enumerate(piece):
                for pitch in notes:
                    col = int(pitch) - LOWEST_PITCH
                    if not 0 <= col < N_KEYS:
                        raise ValueError(
                            f"{path}: {split}[{p_idx}] step {t}: pitch {pitch} outside 21..108"
                        )
                    roll[t, col] = 1
            rolls.append(roll)
        return rolls

    return PianoRollDataset(
        train=to_rolls(raw["train"], "train"),
        valid=to_rolls(raw["valid"], "valid"),
        test=to_rolls(raw["test"], "test"),
    )


def synthetic_daily_temps(n_days: int = 3650, seed: int = 19, base: float = 11.3) -> np.ndarray:
    """Deterministic stand-in for a decade of daily minimum temperatures.

    A southern-hemisphere seasonal cycle plus a slow multi-year drift and
    AR(1) weather noise, on a Celsius-like scale. Used by the harness when no
    real temperature CSV is supplied; it is synthetic and clearly not a
    recorded series.
    """
    rng = substream(seed, "daily_temps")
    day = np.arange(n_days)
    seasonal = base + 4.6 * np.cos(2.0 * np.pi * (day - 196.0) / 365.25)
    drift = 0.7 * np.sin(2.0 * np.pi * day / (365.25 * 3.6) + 0.8)
    noise = np.empty(n_days)
    level = 0.0
    for t in range(n_days):
        level = 0.72 * level + rng.normal(0.0, 1.45)
        noise[t] = level
    return seasonal + drift + noise
