"""JSON containers for trained artifacts.

Arrays are stored as little-endian float64 bytes, base64-encoded, alongside
their shapes; containers carry the seed and a config echo so any weight set
can be reproduced or audited. Serialization is canonical (sorted keys, fixed
separators), so identical artifacts produce identical bytes.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .readout import ReadoutWeights
from .reservoir import HyperParameters, IpConfig, ReservoirWeights, TopologyGrid

WEIGHTS_FORMAT = "esngrid-weights/1"
MODEL_FORMAT = "esngrid-model/1"


def _pack(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    return {"shape": list(arr.shape), "data": base64.b64encode(arr.tobytes()).decode("ascii")}


def _unpack(entry: dict) -> np.ndarray:
    raw = base64.b64decode(entry["data"])
    return np.frombuffer(raw, dtype="<f8").reshape(entry["shape"]).copy()


def topology_to_dict(topology: TopologyGrid) -> dict:
    return {
        "breadth": topology.breadth,
        "depth": topology.depth,
        "input_fed": list(topology.input_fed),
        "edges": [list(e) for e in topology.edges],
    }


def topology_from_dict(d: dict) -> TopologyGrid:
    return TopologyGrid(
        breadth=d["breadth"],
        depth=d["depth"],
        input_fed=tuple(d["input_fed"]),
        edges=tuple((s, t) for s, t in d["edges"]),
    )


def hyperparameters_to_dict(hp: HyperParameters) -> dict:
    return {
        "n_reservoir": hp.n_reservoir,
        "spectral_radius": hp.spectral_radius,
        "leak": hp.leak,
        "input_norm": hp.input_norm,
        "feedforward_norm": hp.feedforward_norm,
        "input_sparsity": hp.input_sparsity,
        "feedforward_sparsity": hp.feedforward_sparsity,
        "recurrent_sparsity": hp.recurrent_sparsity,
        "init_scheme": hp.init_scheme,
        "ip": {
            "learning_rate": hp.ip.learning_rate,
            "target_mean": hp.ip.target_mean,
            "target_std": hp.ip.target_std,
            "epochs": hp.ip.epochs,
        },
        "beta_candidates": list(hp.beta_candidates),
    }


def hyperparameters_from_dict(d: dict) -> HyperParameters:
    kwargs = dict(d)
    ip = kwargs.pop("ip", None)
    if ip is not None:
        kwargs["ip"] = IpConfig(**ip)
    if "beta_candidates" in kwargs:
        kwargs["beta_candidates"] = tuple(kwargs["beta_candidates"])
    return HyperParameters(**kwargs)


def _dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def weights_to_dict(weights: ReservoirWeights, hp: HyperParameters | None = None) -> dict:
    return {
        "format": WEIGHTS_FORMAT,
        "seed": weights.seed,
        "n_inputs": weights.n_inputs,
        "n_reservoir": weights.n_reservoir,
        "topology": topology_to_dict(weights.topology),
        "hyperparameters": hyperparameters_to_dict(hp) if hp is not None else None,
        "arrays": {name: _pack(arr) for name, arr in weights.all_arrays().items()},
    }


def weights_from_dict(d: dict) -> ReservoirWeights:
    if d.get("format") != WEIGHTS_FORMAT:
        raise ValueError(f"not a {WEIGHTS_FORMAT} container")
    topology = topology_from_dict(d["topology"])
    arrays = {name: _unpack(entry) for name, entry in d["arrays"].items()}
    n_res = topology.n_reservoirs
    return ReservoirWeights(
        topology=topology,
        n_inputs=d["n_inputs"],
        n_reservoir=d["n_reservoir"],
        w_in=arrays["w_in"],
        feedforward={
            int(name.split("/")[1]): arr for name, arr in arrays.items() if name.startswith("feedforward/")
        },
        recurrent=[arrays[f"recurrent/{l}"] for l in range(n_res)],
        gain=[arrays[f"gain/{l}"] for l in range(n_res)],
        bias=[arrays[f"bias/{l}"] for l in range(n_res)],
        seed=d.get("seed"),
    )


def save_weights(weights: ReservoirWeights, path: str | Path, hp: HyperParameters | None = None) -> None:
    Path(path).write_text(_dumps(weights_to_dict(weights, hp)))


def load_weights(path: str | Path) -> ReservoirWeights:
    return weights_from_dict(json.loads(Path(path).read_text()))


def model_to_dict(
    weights: ReservoirWeights,
    hp: HyperParameters,
    readout: ReadoutWeights,
    threshold: float | None = None,
    extra: dict | None = None,
) -> dict:
    return {
        "format": MODEL_FORMAT,
        "weights": weights_to_dict(weights, hp),
        "readout": {"beta": readout.beta, "w_out": _pack(readout.w_out)},
        "threshold": threshold,
        "extra": extra or {},
    }


def model_from_dict(d: dict) -> tuple[ReservoirWeights, HyperParameters, ReadoutWeights, float | None]:
    if d.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} container")
    weights = weights_from_dict(d["weights"])
    hp = hyperparameters_from_dict(d["weights"]["hyperparameters"])
    readout = ReadoutWeights(_unpack(d["readout"]["w_out"]), d["readout"]["beta"])
    return weights, hp, readout, d.get("threshold")


def save_model(path: str | Path, **kwargs) -> None:
    Path(path).write_text(_dumps(model_to_dict(**kwargs)))


def load_model(path: str | Path):
    return model_from_dict(json.loads(Path(path).read_text()))
