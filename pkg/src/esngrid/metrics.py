"""Forecast error metrics, frame-level accuracy, and output binarization."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np


@dataclass
class MetricReport:
    """Per-evaluation error summary. ``fl_acc``/``threshold`` apply only to
    binary tasks; ``mape`` is a percentage and is None when the ground truth
    contains zeros."""

    rmse: float
    nrmse: float
    mape: float | None = None
    fl_acc: float | None = None
    threshold: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _paired(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    return y_true, y_pred


def rmse(y_true, y_pred) -> float:
    """Root mean squared error over all entries."""
    y_true, y_pred = _paired(y_true, y_pred)
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))


def nrmse(y_true, y_pred) -> float:
    """RMSE normalized by the ground truth's deviation from its per-channel
    mean over the evaluated timesteps; scale-free."""
    y_true, y_pred = _paired(y_true, y_pred)
    centered = y_true - np.mean(y_true, axis=0, keepdims=True)
    denom = np.sum(centered**2)
    if denom == 0.0:
        raise ValueError("ground truth is constant; normalized error undefined")
    return float(np.sqrt(np.sum((y_true - y_pred) ** 2) / denom))


def mape(y_true, y_pred) -> float:
    """Mean absolute percentage error (in percent)."""
    y_true, y_pred = _paired(y_true, y_pred)
    if np.any(y_true == 0.0):
        raise ValueError("ground truth contains zeros; percentage error undefined")
    return float(100.0 * np.mean(np.abs(y_true - y_pred) / y_true))


def _check_binary(a):
    a = np.asarray(a)
    if not np.isin(a, (0, 1)).all():
        raise ValueError("expected a binary matrix")
    return a.astype(bool)


def fl_acc(y_true, y_pred) -> float:
    """Frame-level accuracy: TP / (TP + FP + FN) pooled over all timesteps.

    Equivalent to intersection-over-union of the positive sets. Returns 1.0
    when neither truth nor prediction contains a positive.
    """
    y_true = _check_binary(y_true)
    y_pred = _check_binary(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    tp = np.count_nonzero(y_true & y_pred)
    fp = np.count_nonzero(~y_true & y_pred)
    fn = np.count_nonzero(y_true & ~y_pred)
    denom = tp + fp + fn
    return 1.0 if denom == 0 else tp / denom


def binarize(raw, threshold: float) -> np.ndarray:
    return (np.asarray(raw, dtype=float) >= threshold).astype(np.uint8)


def find_threshold(raw_pred, y_true, n_candidates: int = 20) -> float:
    """Best binarization threshold by frame-level accuracy.

    Candidates are ``n_candidates`` equally spaced values between the min and
    max of the raw predictions; ties break toward the smallest.
    """
    raw_pred = np.asarray(raw_pred, dtype=float)
    lo, hi = float(raw_pred.min()), float(raw_pred.max())
    if lo == hi:
        return lo
    candidates = np.linspace(lo, hi, n_candidates)
    best_theta, best_score = None, -1.0
    for theta in candidates:
        score = fl_acc(y_true, binarize(raw_pred, theta))
        if score > best_score:
            best_theta, best_score = float(theta), score
    return best_theta


def pearson(a, b) -> float:
    """Sample Pearson correlation of two equal-length nonconstant vectors."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size or a.size < 2:
        raise ValueError("need two vectors of equal length >= 2")
    da = a - a.mean()
    db = b - b.mean()
    na = np.sqrt(np.sum(da**2))
    nb = np.sqrt(np.sum(db**2))
    if na == 0.0 or nb == 0.0:
        raise ValueError("correlation undefined for constant input")
    return float(np.sum(da * db) / (na * nb))
