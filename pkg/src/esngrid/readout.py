"""Linear readout: state harvesting and ridge-regression training.

The design matrix X stacks washout-trimmed concatenated network states across
sequences; the readout solves min ||X W - Y||^2 + beta ||W||^2 either
explicitly or through a thin SVD (the default: exact at beta = 0 via the
pseudoinverse, and reusable across the whole beta sweep).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .reservoir import HyperParameters, ReservoirWeights, run_network


@dataclass
class StateMatrix:
    """Design matrix with row provenance (sequence index, timestep)."""

    values: np.ndarray
    provenance: list[tuple[int, int]]

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]


@dataclass
class ReadoutWeights:
    w_out: np.ndarray  # (state dim, N_Y)
    beta: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.w_out)):
            raise ValueError("readout weights must be finite")


def harvest_states(
    weights: ReservoirWeights,
    hp: HyperParameters,
    sequences: list[tuple[np.ndarray, np.ndarray]],
    washout: int,
) -> tuple[StateMatrix, np.ndarray]:
    """Run the network over each (U, Y) sequence from zero state and stack the
    post-washout rows of states and targets."""
    if washout < 0:
        raise ValueError("washout must be nonnegative")
    xs, ys, provenance = [], [], []
    for i, (u, y) in enumerate(sequences):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if u.shape[0] != y.shape[0]:
            raise ValueError(f"sequence {i}: inputs and targets disagree on length")
        if u.shape[0] <= washout:
            raise ValueError(f"sequence {i} has {u.shape[0]} timesteps, not longer than washout {washout}")
        states = run_network(u, weights, hp)
        xs.append(states.array[washout:])
        ys.append(y[washout:])
        provenance.extend((i, t) for t in range(washout, u.shape[0]))
    return StateMatrix(np.vstack(xs), provenance), np.vstack(ys)


def ridge_explicit(x: np.ndarray, y: np.ndarray, beta: float) -> ReadoutWeights:
    """W = (X^T X + beta I)^-1 X^T Y. Fast, but undefined for rank-deficient
    X at beta = 0; use the SVD path there."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gram = x.T @ x + beta * np.eye(x.shape[1])
    if beta == 0.0 and np.linalg.matrix_rank(x) < x.shape[1]:
        raise np.linalg.LinAlgError(
            "X is rank-deficient and beta = 0; the normal equations are singular (use ridge_svd)"
        )
    try:
        w = np.linalg.solve(gram, x.T @ y)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"normal equations not solvable ({exc}); use ridge_svd") from exc
    return ReadoutWeights(w, beta)


def _solve_from_svd(u, s, vt, y, beta: float) -> np.ndarray:
    if beta == 0.0:
        # pseudoinverse convention: directions with (numerically) zero
        # singular value contribute nothing
        cutoff = max(u.shape[0], vt.shape[1]) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        factors = np.where(s > cutoff, np.divide(1.0, s, out=np.zeros_like(s), where=s > 0), 0.0)
    else:
        factors = s / (s**2 + beta)
    return (vt.T * factors) @ (u.T @ y)


def ridge_svd(x: np.ndarray, y: np.ndarray, beta: float) -> ReadoutWeights:
    """Ridge solution through the thin SVD of X; defined for every X and
    beta >= 0 (beta = 0 gives the minimum-norm least-squares solution)."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    return ReadoutWeights(_solve_from_svd(u, s, vt, y, beta), beta)


def predict(x: np.ndarray, readout: ReadoutWeights) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[1] != readout.w_out.shape[0]:
        raise ValueError(f"state dim {x.shape[1]} does not match readout {readout.w_out.shape[0]}")
    return x @ readout.w_out


def beta_sweep(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    beta_candidates,
    score,
) -> tuple[float, ReadoutWeights, float]:
    """Pick the regularizer by validation score, factoring X once.

    ``score(y_true, y_pred)`` is minimized unless it carries a truthy
    ``higher_is_better`` attribute. Ties go to the smallest beta.
    """
    candidates = sorted(set(float(b) for b in beta_candidates))
    if not candidates:
        raise ValueError("beta_candidates must be nonempty")
    x_train = np.asarray(x_train, dtype=float)
    y_train = np.asarray(y_train, dtype=float)
    u, s, vt = np.linalg.svd(x_train, full_matrices=False)
    uty = u.T @ y_train
    higher = bool(getattr(score, "higher_is_better", False))

    best = None
    for beta in candidates:
        if beta == 0.0:
            w = _solve_from_svd(u, s, vt, y_train, 0.0)
        else:
            w = (vt.T * (s / (s**2 + beta))) @ uty
        readout = ReadoutWeights(w, beta)
        value = float(score(y_val, predict(x_val, readout)))
        better = best is None or (value > best[2] if higher else value < best[2])
        if better:
            best = (beta, readout, value)
    return best
