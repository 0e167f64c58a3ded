"""Deterministic worker pool helpers.

FOLIFLOW_THREADS caps the worker count (default: all cores). Work items are
independent and results are gathered in submission order, so outputs are
bitwise identical for any worker count.
"""

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigError


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("FOLIFLOW_THREADS")
    if cap is not None:
        try:
            cap = int(cap)
        except ValueError:
            raise ConfigError(f"FOLIFLOW_THREADS must be an integer, got {cap!r}")
        if cap < 1:
            raise ConfigError("FOLIFLOW_THREADS must be >= 1")
    else:
        cap = os.cpu_count() or 1
    if requested is None:
        return cap
    return max(1, min(requested, cap))


def parallel_map(fn, items, workers: int | None = None):
    """Map fn over items, preserving order. workers=1 runs inline."""
    n = worker_count(workers)
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
