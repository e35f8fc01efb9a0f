"""Chunked joblib helpers for independent Monte Carlo trials.

numpy releases the GIL inside its kernels, so the thread backend gives real overlap
for the per-trial linear algebra without pickling weights. Results never depend on
the schedule: counts are integer sums and mapped results come back in input order.
"""

import logging
import os
from typing import Callable, Iterable, Optional, Sequence, TypeVar

from joblib import Parallel, delayed

from ..config.environment import get_max_workers

logger = logging.getLogger("parallel")

T = TypeVar("T")
R = TypeVar("R")

MIN_CHUNK = 256


def worker_count(requested: Optional[int] = None) -> int:
    """Workers to use: ``requested`` or the CPU count, capped by EVENINIT_MAX_WORKERS."""
    workers = requested or os.cpu_count() or 1
    cap = get_max_workers()
    if cap is not None:
        workers = min(workers, cap)
    return max(1, workers)


def chunk_bounds(total: int, workers: int, min_chunk: int = MIN_CHUNK) -> list[tuple[int, int]]:
    """Contiguous [start, stop) ranges covering 0 .. total."""
    if total <= 0:
        return []
    chunks = max(1, min(workers * 4, total // min_chunk))
    size = -(-total // chunks)
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> list[R]:
    """``[fn(item) for item in items]`` on the joblib thread backend, results in input order."""
    items: Sequence[T] = list(items)
    n_jobs = worker_count(workers)
    if len(items) <= 1 or n_jobs == 1:
        return [fn(item) for item in items]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fn)(item) for item in items)


def count_successes(count_range: Callable[[int, int], int], total: int,
                    workers: Optional[int] = None) -> int:
    """Sum ``count_range(start, stop)`` over contiguous chunks of 0 .. total."""
    bounds = chunk_bounds(total, worker_count(workers))
    counts = map_ordered(lambda b: int(count_range(*b)), bounds, workers)
    logger.debug("Counted %d chunks of %d trials", len(bounds), total)
    return sum(counts)
