"""Counter-based random streams.

Every stream is a Philox generator keyed by a ``SeedSequence`` built from a
master seed and a path of integers (trial index, chunk index, ...). Streams
never share state, so results do not depend on evaluation order.
"""
from __future__ import annotations

import os

import numpy as np


def stream(seed: int, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """A 63-bit integer seed for the child at ``path``; reproducible and schedule-free."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def worker_count() -> int:
    """Worker cap from ``SUFFQUANT_THREADS`` (0 or unset means CPU count)."""
    raw = os.environ.get("SUFFQUANT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n
