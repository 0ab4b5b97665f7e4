"""Deterministic thread fan-out.

Work units are fixed before scheduling and results are collected by index,
so outputs never depend on the worker count.  TOMOSAR_THREADS caps the pool
(0 or unset means auto).
"""

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigurationError

ENV_THREADS = "TOMOSAR_THREADS"


def worker_count(requested=None):
    """Resolve the effective worker count from the request or environment."""
    if requested is not None:
        n = int(requested)
    else:
        raw = os.environ.get(ENV_THREADS, "0")
        try:
            n = int(raw)
        except ValueError as exc:
            raise ConfigurationError(f"{ENV_THREADS} must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ConfigurationError(f"thread count must be >= 0, got {n}")
    if n == 0:
        n = os.cpu_count() or 1
    return n


def run_indexed(fn, items, workers=None):
    """Apply ``fn`` to each item, preserving input order in the result list."""
    items = list(items)
    n = worker_count(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
