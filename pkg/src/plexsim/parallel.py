"""Bounded, order-preserving parallel map used by sweeps and spectra."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "PLEXSIM_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Worker bound: explicit argument, else $PLEXSIM_THREADS, else the CPU count."""
    if requested is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            requested = os.cpu_count() or 1
    return max(1, int(requested))


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int | None = None) -> list[R]:
    """Apply ``fn`` to every item; results come back in input order."""
    n = worker_count(workers)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
