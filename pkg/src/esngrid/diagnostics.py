"""Reservoir quality diagnostics.

Two views of dynamics quality: (1) separation analysis compares pairwise
distances between inputs with distances between the corresponding states (a
balanced reservoir keeps the relation near the identity line); (2) the local
maximum Lyapunov exponent estimates the average expansion rate of state
perturbations along the driven trajectory (negative = stable, ~0 = edge of
chaos, positive = chaotic).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .reservoir import HyperParameters, ReservoirWeights, run_network
from .rng import substream

logger = logging.getLogger(__name__)

EIG_MODULUS_FLOOR = 1e-12


@dataclass(frozen=True)
class SeparationPoint:
    input_sep: float
    output_sep: float


@dataclass
class SeparationCloud:
    points: list[SeparationPoint]
    skipped: int  # pairs dropped for zero input separation

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.array([p.input_sep for p in self.points])
        y = np.array([p.output_sep for p in self.points])
        return x, y


@dataclass(frozen=True)
class SeparationFit:
    slope: float
    intercept: float
    count: int


def _unrank_pair(r: int, n: int) -> tuple[int, int]:
    # r indexes unordered pairs of range(n) in lexicographic order
    i = int((2 * n - 1 - math.sqrt((2 * n - 1) ** 2 - 8 * r)) // 2)
    offset = lambda k: k * (2 * n - k - 1) // 2  # noqa: E731  rank of pair (k, k+1)
    while i + 1 < n and offset(i + 1) <= r:
        i += 1
    while i > 0 and offset(i) > r:
        i -= 1
    j = r - offset(i) + i + 1
    return i, j


def separation_points(
    inputs: np.ndarray,
    outputs: np.ndarray,
    max_pairs: int = 10_000,
    seed: int = 0,
) -> SeparationCloud:
    """Sample pairwise (input distance, output distance) points.

    Up to ``max_pairs`` distinct unordered pairs are drawn uniformly (all
    pairs when fewer exist). Pairs with zero input separation are skipped and
    counted; an entirely degenerate sample is an error.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    outputs = np.atleast_2d(np.asarray(outputs, dtype=float))
    n = inputs.shape[0]
    if outputs.shape[0] != n or n < 2:
        raise ValueError("need matched inputs and outputs, at least two rows")
    total = n * (n - 1) // 2
    if total <= max_pairs:
        ranks = np.arange(total)
    else:
        ranks = substream(seed, "separation_pairs").choice(total, size=max_pairs, replace=False)
        ranks.sort()
    points, skipped = [], 0
    for r in ranks:
        i, j = _unrank_pair(int(r), n)
        d_in = float(np.linalg.norm(inputs[i] - inputs[j]))
        if d_in == 0.0:
            skipped += 1
            continue
        points.append(SeparationPoint(d_in, float(np.linalg.norm(outputs[i] - outputs[j]))))
    if not points:
        raise ValueError(f"all {skipped} sampled pairs had zero input separation")
    return SeparationCloud(points, skipped)


def separation_fit(points) -> SeparationFit:
    """Least-squares line of output separation against input separation."""
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("need at least two points")
    x = np.array([p.input_sep for p in pts])
    y = np.array([p.output_sep for p in pts])
    dx = x - x.mean()
    var = np.sum(dx**2)
    if var == 0.0:
        raise ValueError("all input separations identical; slope undefined")
    slope = np.sum(dx * (y - y.mean())) / var
    intercept = y.mean() - slope * x.mean()
    return SeparationFit(float(slope), float(intercept), len(pts))


def classify_dynamics(fit: SeparationFit, margin: float = 0.1) -> str:
    """Label a separation fit: outputs spreading faster than inputs means
    chaotic dynamics, slower means attractor-like."""
    if fit.slope > 1.0 + margin:
        return "chaotic"
    if fit.slope < 1.0 - margin:
        return "attractor"
    return "balanced"


def local_mle(
    weights: ReservoirWeights,
    hp: HyperParameters,
    sequences,
    washout: int = 0,
    max_steps: int | None = None,
) -> float:
    """Local maximum Lyapunov exponent of the input-driven network.

    At every kept timestep and reservoir, the one-step state map is linearized
    as (1 - leak) I + leak * diag(1 - activated^2) @ W_rec; the log moduli of
    its eigenvalues (sorted by modulus) accumulate per eigenvalue slot, and
    the largest time-averaged slot wins. Moduli are floored at 1e-12 before
    the log. ``max_steps`` caps the per-sequence timesteps by even striding.
    """
    topo = weights.topology
    nr = weights.n_reservoir
    sums = np.zeros((topo.n_reservoirs, nr))
    count = 0
    floored = 0
    eye_scale = 1.0 - hp.leak
    for u in sequences:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        states = run_network(u, weights, hp, record_preactivations=True)
        n_t = u.shape[0]
        if n_t <= washout:
            continue
        kept = np.arange(washout, n_t)
        if max_steps is not None and kept.size > max_steps:
            kept = kept[np.linspace(0, kept.size - 1, max_steps).round().astype(int)]
        for t in kept:
            for l in range(topo.n_reservoirs):
                d = 1.0 - states.preactivations[l][t] ** 2
                m = hp.leak * (d[:, None] * weights.recurrent[l])
                m[np.diag_indices(nr)] += eye_scale
                moduli = np.sort(np.abs(np.linalg.eigvals(m)))[::-1]
                small = moduli < EIG_MODULUS_FLOOR
                if small.any():
                    floored += int(small.sum())
                    moduli = np.maximum(moduli, EIG_MODULUS_FLOOR)
                sums[l] += np.log(moduli)
            count += 1
    if count == 0:
        raise ValueError("no timesteps left after washout")
    if floored:
        logger.warning("floored %d near-zero eigenvalue moduli at %g", floored, EIG_MODULUS_FLOOR)
    return float(np.max(sums / count))
