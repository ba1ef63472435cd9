"""Counter-based random substreams.

A draw is addressed by ``(seed, stream, block)``; replications are grouped
in fixed-size blocks so the assembled arrays are identical whatever the
number of worker threads.
"""
from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

BLOCK = 8192
WORKERS_ENV = "CONTESTLAB_WORKERS"


def stream_key(stream) -> int:
    if isinstance(stream, str):
        return zlib.crc32(stream.encode("utf-8"))
    return int(stream)


def substream(seed: int, *key) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(stream_key(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SimulationPlan:
    reps: int
    seed: int = 0

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")

    def uniforms(self, stream, width: int) -> np.ndarray:
        """Uniform draws of shape (reps, width) for a named stream."""
        blocks = range((self.reps + BLOCK - 1) // BLOCK)

        def make(b):
            size = min(BLOCK, self.reps - b * BLOCK)
            return substream(self.seed, stream, b).random((size, width))

        workers = worker_count()
        if workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(make, blocks))
        else:
            parts = [make(b) for b in blocks]
        return np.concatenate(parts, axis=0) if parts else np.empty((0, width))

    def generator(self, stream) -> np.random.Generator:
        return substream(self.seed, stream, "sequential")


def standard_error(samples: np.ndarray) -> float:
    samples = np.asarray(samples, dtype=float)
    if len(samples) < 2:
        return 0.0
    return float(np.std(samples, ddof=1) / np.sqrt(len(samples)))
