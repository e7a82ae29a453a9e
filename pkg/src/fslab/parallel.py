"""Deterministic, worker-count-independent Monte Carlo replication.

Every replicate i draws from its own counter-based stream keyed by
(master seed, i), so the sampled values never depend on how replicates are
chunked or on how many worker processes execute the chunks.  Workers return
per-replicate record arrays that are concatenated in replicate order;
all floating-point reductions happen on the merged arrays, which makes
results byte-identical across worker counts.
"""

from __future__ import annotations

import multiprocessing as mp
import os
from typing import Callable

import numpy as np

__all__ = ["replicate_generator", "run_replicates", "resolve_workers", "default_chunk"]


def replicate_generator(seed: int, replicate: int) -> np.random.Generator:
    """The independent stream of one replicate: Philox keyed by (seed, i)."""
    key = np.array([np.uint64(seed), np.uint64(replicate)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def default_chunk(n: int) -> int:
    """Replicate-chunk size; a function of n only (never of worker count)."""
    return min(n, max(256, -(-n // 512)))


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else LAB_WORKERS, else cpu count."""
    if workers is not None and workers > 0:
        return workers
    env = os.environ.get("LAB_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _invoke(worker, lo, hi, seed):
    return worker(lo, hi, seed)


def run_replicates(
    n: int,
    seed: int,
    worker: Callable[[int, int, int], np.ndarray],
    workers: int = 1,
    chunk: int | None = None,
) -> np.ndarray:
    """Run ``worker(lo, hi, seed) -> (hi-lo, ...)`` over n replicates.

    Returns the records concatenated in replicate order.  ``worker`` must be
    picklable (a module-level function or functools.partial of one) and must
    derive all randomness from replicate_generator(seed, i), lo <= i < hi.
    """
    if n <= 0:
        raise ValueError("need at least one replicate")
    step = chunk or default_chunk(n)
    ranges = [(lo, min(lo + step, n)) for lo in range(0, n, step)]
    if workers <= 1 or len(ranges) == 1:
        parts = [worker(lo, hi, seed) for lo, hi in ranges]
    else:
        ctx = mp.get_context("fork")
        with ctx.Pool(processes=workers) as pool:
            parts = pool.starmap(
                _invoke, [(worker, lo, hi, seed) for lo, hi in ranges], chunksize=1
            )
    return np.concatenate(parts, axis=0)
