"""Deterministic task splitting and per-task random streams.

Work is cut into chunks of a fixed size that does not depend on the number of
worker threads, and every chunk writes into its own slice of a pre-sized
buffer. Results are therefore bit-identical for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

CHUNK = 2048


def chunk_ranges(n_items: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(i, min(i + chunk, n_items)) for i in range(0, n_items, chunk)]


def run_chunked(work: Callable[[int, int], None], n_items: int, threads: int | None = 1,
                chunk: int = CHUNK) -> None:
    """Call ``work(start, stop)`` over fixed-size ranges, possibly concurrently."""
    ranges = chunk_ranges(n_items, chunk)
    if not threads or threads <= 1 or len(ranges) <= 1:
        for a, b in ranges:
            work(a, b)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for fut in [pool.submit(work, a, b) for a, b in ranges]:
            fut.result()


def task_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based (Philox) stream for task ``key`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
