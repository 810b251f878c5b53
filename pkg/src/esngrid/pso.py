"""Star-topology particle swarm optimization over bounded mixed spaces.

Every particle chases a blend of its own best position and the swarm-wide
best. Velocity terms use per-dimension random scaling; positions are clamped
to the box, zeroing the offending velocity component. Minimization
convention throughout; callers negate scores they want maximized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import substream


@dataclass(frozen=True)
class Dimension:
    """One search dimension. ``kind`` is continuous, integer, or categorical
    (index into ``choices``); ``log10`` decodes the position as 10**p."""

    name: str
    lower: float
    upper: float
    kind: str = "continuous"
    log10: bool = False
    choices: tuple | None = None

    def __post_init__(self):
        if self.lower >= self.upper:
            raise ValueError(f"{self.name}: lower bound must be below upper")
        if self.kind not in ("continuous", "integer", "categorical"):
            raise ValueError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind == "categorical":
            if not self.choices:
                raise ValueError(f"{self.name}: categorical dimension needs choices")
            if self.log10:
                raise ValueError(f"{self.name}: categorical dimensions cannot be log-scaled")

    def decode(self, p: float):
        if self.kind == "categorical":
            idx = int(np.clip(round(p), 0, len(self.choices) - 1))
            return self.choices[idx]
        value = 10.0**p if self.log10 else p
        if self.kind == "integer":
            return int(round(value))
        return value

    def encode(self, value) -> float:
        if self.kind == "categorical":
            return float(self.choices.index(value))
        p = float(value)
        return float(np.log10(p)) if self.log10 else p


@dataclass(frozen=True)
class SearchSpace:
    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        if not self.dimensions:
            raise ValueError("search space must have at least one dimension")
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")

    def __len__(self):
        return len(self.dimensions)

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.lower for d in self.dimensions])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.upper for d in self.dimensions])


def decode_position(space: SearchSpace, position: np.ndarray) -> dict:
    """Named hyperparameter assignment for a position vector."""
    return {d.name: d.decode(p) for d, p in zip(space.dimensions, position)}


def encode_assignment(space: SearchSpace, assignment: dict) -> np.ndarray:
    return np.array([d.encode(assignment[d.name]) for d in space.dimensions])


@dataclass
class Swarm:
    space: SearchSpace
    positions: np.ndarray  # (n_particles, n_dims)
    velocities: np.ndarray
    best_positions: np.ndarray
    best_scores: np.ndarray
    global_best: np.ndarray
    global_best_score: float
    inertia: float = 0.9
    cognitive: float = 0.5
    social: float = 0.3
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]


def init_swarm(
    space: SearchSpace,
    n_particles: int,
    seed: int,
    inertia: float = 0.9,
    cognitive: float = 0.5,
    social: float = 0.3,
) -> Swarm:
    """Positions uniform in the box; velocities uniform in +-(range / 2)."""
    if n_particles < 1:
        raise ValueError("need at least one particle")
    rng = substream(seed, "swarm")
    lower, upper = space.lower, space.upper
    span = upper - lower
    positions = rng.uniform(lower, upper, size=(n_particles, len(space)))
    velocities = rng.uniform(-span / 2.0, span / 2.0, size=(n_particles, len(space)))
    return Swarm(
        space=space,
        positions=positions,
        velocities=velocities,
        best_positions=positions.copy(),
        best_scores=np.full(n_particles, np.inf),
        global_best=positions[0].copy(),
        global_best_score=np.inf,
        inertia=inertia,
        cognitive=cognitive,
        social=social,
        rng=rng,
    )


def swarm_step(swarm: Swarm, fitness) -> Swarm:
    """Absorb one round of scores, then move every particle.

    Non-finite scores count as +inf (never become a best). Steps mutate the
    swarm in place and return it.
    """
    scores = np.asarray(fitness, dtype=float)
    if scores.shape != (swarm.n_particles,):
        raise ValueError("need exactly one score per particle")
    scores = np.where(np.isfinite(scores), scores, np.inf)

    improved = scores < swarm.best_scores
    swarm.best_positions[improved] = swarm.positions[improved]
    swarm.best_scores[improved] = scores[improved]
    leader = int(np.argmin(swarm.best_scores))
    if swarm.best_scores[leader] < swarm.global_best_score:
        swarm.global_best = swarm.best_positions[leader].copy()
        swarm.global_best_score = float(swarm.best_scores[leader])

    shape = swarm.positions.shape
    u1 = swarm.rng.random(shape)
    u2 = swarm.rng.random(shape)
    swarm.velocities = (
        swarm.inertia * swarm.velocities
        + swarm.cognitive * u1 * (swarm.best_positions - swarm.positions)
        + swarm.social * u2 * (swarm.global_best - swarm.positions)
    )
    swarm.positions = swarm.positions + swarm.velocities

    lower, upper = swarm.space.lower, swarm.space.upper
    below = swarm.positions < lower
    above = swarm.positions > upper
    swarm.positions = np.clip(swarm.positions, lower, upper)
    swarm.velocities[below | above] = 0.0
    return swarm


def _swarm_state(swarm: Swarm, iteration: int, trace: list[float]) -> dict:
    return {
        "iteration": iteration,
        "positions": swarm.positions.tolist(),
        "velocities": swarm.velocities.tolist(),
        "best_positions": swarm.best_positions.tolist(),
        "best_scores": swarm.best_scores.tolist(),
        "global_best": swarm.global_best.tolist(),
        "global_best_score": swarm.global_best_score,
        "rng_state": swarm.rng.bit_generator.state,
        "trace": trace,
    }


def _restore_swarm(swarm: Swarm, state: dict) -> tuple[int, list[float]]:
    swarm.positions = np.array(state["positions"])
    swarm.velocities = np.array(state["velocities"])
    swarm.best_positions = np.array(state["best_positions"])
    swarm.best_scores = np.array(state["best_scores"])
    swarm.global_best = np.array(state["global_best"])
    swarm.global_best_score = state["global_best_score"]
    swarm.rng.bit_generator.state = state["rng_state"]
    return state["iteration"], list(state["trace"])


def optimize(
    objective,
    space: SearchSpace,
    iterations: int,
    n_particles: int,
    inertia: float = 0.9,
    cognitive: float = 0.5,
    social: float = 0.3,
    seed: int = 0,
    evaluator=None,
    checkpoint_path: str | Path | None = None,
) -> tuple[np.ndarray, float, list[float]]:
    """Minimize ``objective(position)`` and return (best position, best
    score, per-iteration best-ever trace).

    All particles are scored each iteration; best updates land only after the
    full round, so results do not depend on evaluation order. ``evaluator``
    may map the objective over positions concurrently (defaults to a serial
    map). An objective exception costs that particle +inf and the search goes
    on. A checkpoint file written each iteration allows exact resumption.
    """
    if iterations < 1:
        raise ValueError("iterations must be positive")

    def _safe(position):
        try:
            return float(objective(position))
        except Exception:
            return np.inf

    run_all = evaluator if evaluator is not None else lambda f, xs: [f(x) for x in xs]
    swarm = init_swarm(space, n_particles, seed, inertia, cognitive, social)
    start, trace = 0, []
    if checkpoint_path is not None and Path(checkpoint_path).exists():
        with open(checkpoint_path) as fh:
            start, trace = _restore_swarm(swarm, json.load(fh))

    for it in range(start, iterations):
        scores = run_all(_safe, [swarm.positions[i].copy() for i in range(n_particles)])
        swarm_step(swarm, scores)
        trace.append(swarm.global_best_score)
        if checkpoint_path is not None:
            with open(checkpoint_path, "w") as fh:
                json.dump(_swarm_state(swarm, it + 1, trace), fh)
    return swarm.global_best.copy(), swarm.global_best_score, trace
