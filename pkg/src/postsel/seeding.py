"""Deterministic stream derivation for parallel experiments.

Every chunk of replicas gets its own generator derived from
(master_seed, task_id, chunk_index), so results depend only on those
three values and never on thread scheduling.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, task_id: str, replica_index: int) -> int:
    x = (int(master_seed) & _MASK64) ^ fnv1a64(task_id)
    x = (x + (replica_index + 1) * _GOLDEN) & _MASK64
    return splitmix64(x)


def derive_stream(master_seed: int, task_id: str, replica_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.PCG64(derive_seed(master_seed, task_id, replica_index))
    )
