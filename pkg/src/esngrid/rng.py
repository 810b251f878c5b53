"""Deterministic named RNG substreams.

Every random draw in the library comes from a generator derived from a base
seed plus a path of names (e.g. ``substream(seed, "reservoir", 2, "recurrent")``).
Streams for different paths are independent, so adding reservoirs or matrices
never shifts the draws of existing ones, and any component can be rebuilt in
isolation from its own derived seed.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _path_words(*names) -> list[int]:
    digest = hashlib.sha256("/".join(str(n) for n in names).encode()).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def derive_seed(seed: int, *names) -> int:
    """Stable integer seed for the substream at ``names`` under ``seed``."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    path = f"{seed}/" + "/".join(str(n) for n in names)
    digest = hashlib.sha256(path.encode()).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed: int, *names) -> np.random.Generator:
    """Generator for the named substream of ``seed``."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence([seed, *_path_words(*names)]))


def reservoir_seed(seed: int, breadth_index: int, depth_index: int) -> int:
    """Per-reservoir seed; a reservoir's weights depend only on this value."""
    return derive_seed(seed, "reservoir", breadth_index, depth_index)
