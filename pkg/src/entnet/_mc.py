"""Shared Monte Carlo plumbing: counter-based streams and chunked trials.

Trials are split into fixed-size chunks; chunk i draws from a Philox
stream keyed by (seed, i), with a per-instance stream id in the counter
block so different simulated instances never share randomness.  Chunk
layout depends only on the trial count, and chunk sums are combined in
index order with exact summation, so results are identical under any
thread count.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

CHUNK_TRIALS = 1 << 16
MAX_SLOTS = 1_000_000
UINT64_MASK = (1 << 64) - 1


def instance_stream(*parts) -> int:
    """Stable stream id for a simulation instance (decorrelates sweeps)."""
    text = "|".join(repr(p) for p in parts)
    return zlib.crc32(text.encode("utf-8"))


def chunk_generator(seed: int, chunk_index: int, stream: int = 0) -> np.random.Generator:
    key = np.array([seed & UINT64_MASK, chunk_index], dtype=np.uint64)
    # the stream id occupies a high counter word; generation only ever
    # advances the low word, so streams cannot collide
    counter = np.array([0, stream & UINT64_MASK, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def chunk_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, CHUNK_TRIALS)
    return [CHUNK_TRIALS] * full + ([rest] if rest else [])


def run_chunked_trials(
    run_chunk: Callable[[int, int], tuple[float, float]],
    trials: int,
    workers: int,
) -> tuple[float, float]:
    """Map ``run_chunk(index, size) -> (sum, sumsq)``; pool mean and std error."""
    sizes = chunk_sizes(trials)
    if workers == 1 or len(sizes) == 1:
        results = [run_chunk(i, size) for i, size in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_chunk, range(len(sizes)), sizes))
    mean = math.fsum(r[0] for r in results) / trials
    if trials > 1:
        ss = math.fsum(r[1] for r in results) - trials * mean * mean
        variance = max(ss, 0.0) / (trials - 1)
    else:
        variance = 0.0
    return mean, math.sqrt(variance / trials)
