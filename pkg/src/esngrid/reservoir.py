"""Grid-structured echo state networks: weight construction and state evolution.

A network is a breadth x depth grid of leaky tanh reservoirs. Each chain's
first reservoir is driven by the external input; reservoir (b, d) feeds
(b, d+1) through a fixed feedforward matrix, and every reservoir has its own
recurrent matrix tuned so the leak-mixed update hits a target spectral radius.
The network state at time t is the input vector followed by all reservoir
states in canonical (breadth, depth) order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from graphlib import CycleError, TopologicalSorter
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .rng import reservoir_seed, substream

INPUT = -1  # source index for the external input in connectivity edges

DEFAULT_BETA_CANDIDATES = (0.0,) + tuple(10.0**-n for n in range(8, 0, -1))

DENSE_EIG_LIMIT = 512  # above this, spectral radii come from power iteration


@dataclass(frozen=True)
class TopologyGrid:
    """Reservoir grid with an explicit feedforward connectivity map.

    ``input_fed`` lists reservoirs driven by the external input; ``edges``
    are (source, destination) reservoir pairs. Reservoir l = b * depth + d.
    """

    breadth: int
    depth: int
    input_fed: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    order: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.breadth < 1 or self.depth < 1:
            raise ValueError("breadth and depth must be positive")
        n = self.n_reservoirs
        if any(not 0 <= l < n for l in self.input_fed):
            raise ValueError("input_fed index out of range")
        sources: dict[int, list[int]] = {l: [] for l in range(n)}
        for src, dst in self.edges:
            if not 0 <= dst < n or not 0 <= src < n:
                raise ValueError(f"edge ({src}, {dst}) out of range")
            if src == dst:
                raise ValueError("self-edges are not feedforward; recurrence lives in the recurrent matrix")
            sources[dst].append(src)
        fed = set(self.input_fed)
        for l in range(n):
            if l not in fed and not sources[l]:
                raise ValueError(f"reservoir {l} has no incoming connection")
            if l in fed and sources[l]:
                raise ValueError(f"reservoir {l} mixes input and reservoir sources")
        try:
            order = tuple(TopologicalSorter({l: sources[l] for l in range(n)}).static_order())
        except CycleError as exc:
            raise ValueError("feedforward connectivity must be acyclic") from exc
        object.__setattr__(self, "order", order)

    @classmethod
    def grid(cls, breadth: int, depth: int) -> "TopologyGrid":
        """Dense grid: ``breadth`` parallel chains, each ``depth`` deep."""
        input_fed = tuple(b * depth for b in range(breadth))
        edges = tuple(
            (b * depth + d - 1, b * depth + d) for b in range(breadth) for d in range(1, depth)
        )
        return cls(breadth, depth, input_fed, edges)

    @property
    def n_reservoirs(self) -> int:
        return self.breadth * self.depth

    def sources_of(self, l: int) -> tuple[int, ...]:
        return tuple(src for src, dst in self.edges if dst == l)

    def position(self, l: int) -> tuple[int, int]:
        return divmod(l, self.depth)


@dataclass(frozen=True)
class IpConfig:
    """Intrinsic-plasticity settings: online gain/bias adaptation toward a
    target Gaussian activation distribution. ``epochs = 0`` disables it."""

    learning_rate: float = 5e-4
    target_mean: float = 0.0
    target_std: float = 0.1
    epochs: int = 3

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.target_std <= 0:
            raise ValueError("target_std must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")


@dataclass(frozen=True)
class HyperParameters:
    """All tunable scalars of a network."""

    n_reservoir: int
    spectral_radius: float = 0.9
    leak: float = 1.0
    input_norm: float = 1.0
    feedforward_norm: float = 1.0
    input_sparsity: float = 0.0
    feedforward_sparsity: float = 0.0
    recurrent_sparsity: float = 0.0
    init_scheme: str = "uniform_norm"
    ip: IpConfig = field(default_factory=IpConfig)
    beta_candidates: tuple[float, ...] = DEFAULT_BETA_CANDIDATES

    def __post_init__(self):
        if self.n_reservoir < 1:
            raise ValueError("n_reservoir must be positive")
        if self.spectral_radius <= 0:
            raise ValueError("spectral_radius must be positive")
        if not 0.0 < self.leak <= 1.0:
            raise ValueError("leak must lie in (0, 1]")
        if self.input_norm <= 0 or self.feedforward_norm <= 0:
            raise ValueError("norm targets must be positive")
        for name in ("input_sparsity", "feedforward_sparsity", "recurrent_sparsity"):
            s = getattr(self, name)
            if not 0.0 <= s < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.init_scheme not in ("uniform_norm", "glorot"):
            raise ValueError(f"unknown init_scheme {self.init_scheme!r}")
        if not self.beta_candidates:
            raise ValueError("beta_candidates must be nonempty")
        if any(b < 0 for b in self.beta_candidates):
            raise ValueError("beta candidates must be nonnegative")


@dataclass
class ReservoirWeights:
    """Fixed weight tensors of a network plus the per-neuron plasticity
    parameters. Arrays are frozen after construction; adapted gains/biases
    come back as a new instance."""

    topology: TopologyGrid
    n_inputs: int
    n_reservoir: int
    w_in: np.ndarray  # (n_inputs, len(input_fed) * n_reservoir), block per fed reservoir
    feedforward: dict[int, np.ndarray]  # dest -> (n_reservoir, total source dim)
    recurrent: list[np.ndarray]  # per reservoir (n_reservoir, n_reservoir)
    gain: list[np.ndarray]
    bias: list[np.ndarray]
    seed: int | None = None

    def __post_init__(self):
        for arr in self.all_arrays().values():
            arr.setflags(write=False)

    def all_arrays(self) -> dict[str, np.ndarray]:
        out = {"w_in": self.w_in}
        for l, m in sorted(self.feedforward.items()):
            out[f"feedforward/{l}"] = m
        for l, m in enumerate(self.recurrent):
            out[f"recurrent/{l}"] = m
        for l, v in enumerate(self.gain):
            out[f"gain/{l}"] = v
        for l, v in enumerate(self.bias):
            out[f"bias/{l}"] = v
        return out

    def input_block(self, l: int) -> np.ndarray:
        """W_in columns feeding reservoir ``l``, as an (n_inputs, N_R) view."""
        k = self.topology.input_fed.index(l)
        return self.w_in[:, k * self.n_reservoir : (k + 1) * self.n_reservoir]

    def with_plasticity(self, gain: list[np.ndarray], bias: list[np.ndarray]) -> "ReservoirWeights":
        return replace(self, gain=gain, bias=bias)

    @property
    def state_dim(self) -> int:
        return self.n_inputs + self.topology.n_reservoirs * self.n_reservoir


class StateLayout:
    """Column layout of concatenated network state vectors."""

    def __init__(self, n_inputs: int, n_reservoirs: int, n_reservoir: int):
        self.n_inputs = n_inputs
        self.n_reservoirs = n_reservoirs
        self.n_reservoir = n_reservoir

    @property
    def dim(self) -> int:
        return self.n_inputs + self.n_reservoirs * self.n_reservoir

    def input_slice(self) -> slice:
        return slice(0, self.n_inputs)

    def reservoir_slice(self, l: int) -> slice:
        start = self.n_inputs + l * self.n_reservoir
        return slice(start, start + self.n_reservoir)


@dataclass
class StateSequence:
    """Harvested states for one input sequence.

    ``array[t]`` is the concatenated network state (input first, then
    reservoirs in canonical order). ``preactivations[l]`` holds each
    reservoir's tanh outputs when recording was requested.
    """

    array: np.ndarray
    layout: StateLayout
    preactivations: list[np.ndarray] | None = None

    def __len__(self) -> int:
        return self.array.shape[0]

    def reservoir_states(self, l: int) -> np.ndarray:
        return self.array[:, self.layout.reservoir_slice(l)]

    def final_state(self) -> np.ndarray:
        return self.array[-1].copy()


def spectral_radius_dense(w: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(w)))) if w.size else 0.0


def power_radius(matvec, n: int, tol: float = 1e-9, max_iter: int = 10_000, seed: int = 0) -> float:
    """Dominant eigenvalue modulus via power iteration.

    Complex conjugate pairs make single-step Rayleigh quotients oscillate, so
    the modulus is read off a two-step linear fit: with iterates a, b = Ma,
    c = Mb, solving c = p*b + q*a gives the characteristic polynomial
    t^2 - p*t - q of the dominant (pair of) eigenvalue(s).
    """
    rng = substream(seed, "power_iteration")
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    estimate = np.inf
    for _ in range(max_iter):
        b = matvec(v)
        nb = np.linalg.norm(b)
        if nb == 0.0:
            return 0.0
        c = matvec(b)
        # least squares for c = p*b + q*v using the 2x2 normal equations
        g = np.array([[b @ b, b @ v], [b @ v, v @ v]])
        rhs = np.array([b @ c, v @ c])
        try:
            p, q = np.linalg.solve(g, rhs)
        except np.linalg.LinAlgError:
            p, q = nb, 0.0
        roots = np.roots([1.0, -p, -q])
        new = float(np.max(np.abs(roots)))
        if abs(new - estimate) <= tol * max(1.0, new):
            return new
        estimate = new
        nc = np.linalg.norm(c)
        v = c / nc if nc > 0 else b / nb
    return estimate


def _leak_mixed_radius(eigvals: np.ndarray | None, w: np.ndarray, leak: float, c: float) -> float:
    """Spectral radius of (1-leak) I + leak * c * W."""
    if eigvals is not None:
        return float(np.max(np.abs((1.0 - leak) + leak * c * eigvals)))
    n = w.shape[0]
    return power_radius(lambda x: (1.0 - leak) * x + leak * c * (w @ x), n)


def scale_spectral_radius(w: np.ndarray, leak: float, target: float) -> np.ndarray:
    """Rescale ``w`` so the leak-mixed update matrix has spectral radius ``target``.

    Solves for c such that rho((1-leak) I + leak * c * w) = target. The mixed
    spectrum is an affine image of w's, so for dense-eig sizes c comes from a
    1-D root find over w's eigenvalues; larger matrices re-estimate the mixed
    radius by power iteration inside the same root find.
    """
    if not 0.0 < leak <= 1.0:
        raise ValueError("leak must lie in (0, 1]; leak = 0 leaves the radius fixed at 1")
    if target <= 0:
        raise ValueError("target spectral radius must be positive")
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("w must be square")

    eigvals = np.linalg.eigvals(w) if w.shape[0] <= DENSE_EIG_LIMIT else None
    base_radius = (
        float(np.max(np.abs(eigvals))) if eigvals is not None else power_radius(lambda x: w @ x, w.shape[0])
    )
    if base_radius <= 1e-14:
        raise ValueError("w has zero spectral radius and cannot be rescaled to the target")

    if leak == 1.0:
        return w * (target / base_radius)

    def gap(c: float) -> float:
        return _leak_mixed_radius(eigvals, w, leak, c) - target

    if gap(0.0) > 0.0:
        raise ValueError(
            f"target {target} is below the leak floor {1.0 - leak:.6g}; unreachable by rescaling"
        )
    hi = 1.0
    for _ in range(200):
        if gap(hi) >= 0.0:
            break
        hi *= 2.0
    else:
        raise ValueError("failed to bracket the rescaling factor")
    c = brentq(gap, 0.0, hi, xtol=1e-13, rtol=1e-15)
    scaled = w * c
    achieved = _leak_mixed_radius(eigvals, w, leak, c)
    if abs(achieved - target) > 1e-6:
        raise ValueError(f"rescaling missed the target radius: {achieved} vs {target}")
    return scaled


def _draw_matrix(rng_w, rng_mask, shape, sparsity, scheme, fan=None) -> np.ndarray:
    if scheme == "glorot":
        n_in, n_out = fan
        w = rng_w.normal(0.0, np.sqrt(2.0 / (n_in + n_out)), size=shape)
    else:
        w = rng_w.uniform(-1.0, 1.0, size=shape)
    if sparsity > 0.0:
        w = np.where(rng_mask.random(shape) < sparsity, 0.0, w)
    return w


def init_weights(
    topology: TopologyGrid,
    hp: HyperParameters,
    n_inputs: int,
    seed: int,
    reservoir_seeds: Sequence[int] | None = None,
) -> ReservoirWeights:
    """Draw all fixed weights for a network.

    uniform_norm: entries ~ U(-1, 1), sparsity mask, then Frobenius rescale
    (W_in jointly across its blocks, feedforward matrices individually).
    glorot: entries ~ N(0, 2 / (fan_in + fan_out)), sparsity mask, no rescale.
    Recurrent matrices are always uniform draws rescaled so the leak-mixed
    update hits ``hp.spectral_radius``.

    Each reservoir draws from substreams of its own derived seed, so a grid
    reservoir is bit-identical to the same reservoir built in isolation with
    ``reservoir_seeds=[reservoir_seed(seed, b, d)]``.
    """
    if n_inputs < 1:
        raise ValueError("n_inputs must be positive")
    n_res = topology.n_reservoirs
    if reservoir_seeds is None:
        seeds = [reservoir_seed(seed, *topology.position(l)) for l in range(n_res)]
    else:
        if len(reservoir_seeds) != n_res:
            raise ValueError("need one seed per reservoir")
        seeds = list(reservoir_seeds)

    nr = hp.n_reservoir
    blocks = []
    for l in topology.input_fed:
        blocks.append(
            _draw_matrix(
                substream(seeds[l], "input"),
                substream(seeds[l], "input_mask"),
                (n_inputs, nr),
                hp.input_sparsity,
                hp.init_scheme,
                fan=(n_inputs, nr),
            )
        )
    w_in = np.hstack(blocks) if blocks else np.zeros((n_inputs, 0))
    if hp.init_scheme == "uniform_norm" and w_in.size:
        norm = np.linalg.norm(w_in)
        if norm == 0.0:
            raise ValueError("input matrix fully nullified; lower input_sparsity")
        w_in = w_in * (hp.input_norm / norm)

    feedforward: dict[int, np.ndarray] = {}
    recurrent: list[np.ndarray] = []
    for l in range(n_res):
        srcs = topology.sources_of(l)
        if srcs:
            src_dim = len(srcs) * nr
            m = _draw_matrix(
                substream(seeds[l], "feedforward"),
                substream(seeds[l], "feedforward_mask"),
                (nr, src_dim),
                hp.feedforward_sparsity,
                hp.init_scheme,
                fan=(src_dim, nr),
            )
            if hp.init_scheme == "uniform_norm":
                norm = np.linalg.norm(m)
                if norm == 0.0:
                    raise ValueError(f"feedforward matrix into reservoir {l} fully nullified")
                m = m * (hp.feedforward_norm / norm)
            feedforward[l] = m

        raw = substream(seeds[l], "recurrent").uniform(-1.0, 1.0, size=(nr, nr))
        if hp.recurrent_sparsity > 0.0:
            mask = substream(seeds[l], "recurrent_mask").random((nr, nr)) < hp.recurrent_sparsity
            raw = np.where(mask, 0.0, raw)
        try:
            recurrent.append(scale_spectral_radius(raw, hp.leak, hp.spectral_radius))
        except ValueError as exc:
            raise ValueError(f"recurrent matrix of reservoir {l}: {exc}") from exc

    gain = [np.ones(nr) for _ in range(n_res)]
    bias = [np.zeros(nr) for _ in range(n_res)]
    return ReservoirWeights(
        topology=topology,
        n_inputs=n_inputs,
        n_reservoir=nr,
        w_in=w_in,
        feedforward=feedforward,
        recurrent=recurrent,
        gain=gain,
        bias=bias,
        seed=seed if reservoir_seeds is None else None,
    )


def layer_step(
    l: int,
    input_vec: np.ndarray,
    prev_state: np.ndarray,
    weights: ReservoirWeights,
    leak: float,
) -> tuple[np.ndarray, np.ndarray]:
    """One reservoir update; returns (tanh output, leak-mixed state)."""
    if l in weights.topology.input_fed:
        w = weights.input_block(l).T
    else:
        w = weights.feedforward[l]
    if input_vec.shape[-1] != w.shape[1]:
        raise ValueError(f"reservoir {l} expects input dim {w.shape[1]}, got {input_vec.shape[-1]}")
    drive = w @ input_vec + weights.recurrent[l] @ prev_state
    activated = np.tanh(weights.gain[l] * drive + weights.bias[l])
    state = (1.0 - leak) * prev_state + leak * activated
    return activated, state


def run_network(
    inputs: np.ndarray,
    weights: ReservoirWeights,
    hp: HyperParameters,
    initial_state: np.ndarray | None = None,
    record_preactivations: bool = False,
) -> StateSequence:
    """Drive the network over a (N_t, N_U) input sequence.

    Reservoirs update in topological order within a timestep; a downstream
    reservoir sees its sources' states from the *same* timestep. Returns all
    concatenated states (input columns first).
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    if inputs.ndim != 2 or inputs.shape[1] != weights.n_inputs:
        raise ValueError(f"inputs must be (N_t, {weights.n_inputs})")
    if not np.all(np.isfinite(inputs)):
        raise ValueError("inputs must be finite")

    topo = weights.topology
    nr = weights.n_reservoir
    n_t = inputs.shape[0]
    layout = StateLayout(weights.n_inputs, topo.n_reservoirs, nr)

    states = [np.zeros(nr) for _ in range(topo.n_reservoirs)]
    if initial_state is not None:
        initial_state = np.asarray(initial_state, dtype=float)
        if initial_state.shape != (layout.dim,):
            raise ValueError(f"initial_state must have shape ({layout.dim},)")
        for l in range(topo.n_reservoirs):
            states[l] = initial_state[layout.reservoir_slice(l)].copy()

    out = np.empty((n_t, layout.dim))
    pre = [np.empty((n_t, nr)) for _ in range(topo.n_reservoirs)] if record_preactivations else None
    if n_t == 0:
        return StateSequence(out, layout, pre)

    leak = hp.leak
    # hoist per-reservoir pieces; project the input through W_in for all t at once
    in_proj = {l: inputs @ weights.input_block(l) for l in topo.input_fed}
    sources = {l: topo.sources_of(l) for l in topo.order}
    ff = weights.feedforward
    rec = weights.recurrent
    gain = weights.gain
    bias = weights.bias

    out[:, layout.input_slice()] = inputs
    for t in range(n_t):
        for l in topo.order:
            if l in in_proj:
                drive = in_proj[l][t] + rec[l] @ states[l]
            else:
                srcs = sources[l]
                src_vec = states[srcs[0]] if len(srcs) == 1 else np.concatenate([states[s] for s in srcs])
                drive = ff[l] @ src_vec + rec[l] @ states[l]
            activated = np.tanh(gain[l] * drive + bias[l])
            states[l] = (1.0 - leak) * states[l] + leak * activated
            out[t, layout.reservoir_slice(l)] = states[l]
            if pre is not None:
                pre[l][t] = activated
    return StateSequence(out, layout, pre)
