"""Chunked random substreams that make results independent of worker count."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List

import numpy as np

CHUNK = 4096


def chunk_bounds(n: int, chunk: int = CHUNK):
    return [(start, min(start + chunk, n)) for start in range(0, n, chunk)]


def chunk_generator(seed: int, index: int, domain: int = 0) -> np.random.Generator:
    """Generator for chunk ``index``; ``domain`` separates unrelated uses of one seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(domain), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def map_chunks(fn: Callable[[int, int, int], object], n: int, workers: int = 1) -> List[object]:
    """Apply ``fn(index, start, stop)`` to every chunk; results come back in chunk order."""
    bounds = chunk_bounds(n)
    jobs = [(i, lo, hi) for i, (lo, hi) in enumerate(bounds)]
    if workers <= 1 or len(jobs) == 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
