"""Deterministic worker-pool helper.

Results are collected by input index, so the output is identical for any
worker count.  MAXAVG_THREADS caps the pool; unset means all cores.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get("MAXAVG_THREADS")
    limit = os.cpu_count() or 1
    if cap is not None:
        try:
            limit = max(1, min(limit, int(cap)))
        except ValueError:
            raise ValueError(f"MAXAVG_THREADS must be an integer: {cap!r}")
    if requested is not None:
        limit = max(1, min(limit, requested))
    return limit


def deterministic_map(
    fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None
) -> Sequence[R]:
    items = list(items)
    n = worker_count(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
