"""Order-preserving thread fan-out capped by ``LQPAT_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional

ENV_THREADS = "LQPAT_THREADS"


def worker_count(workers: Optional[int] = None) -> int:
    """Resolve a worker count; ``None`` reads ``LQPAT_THREADS``, 0 means one per CPU."""
    if workers is None:
        raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if workers < 0:
        raise ValueError("worker count must be >= 0")
    return workers or (os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Iterable, workers: Optional[int] = None) -> list:
    """``[fn(x) for x in items]``, possibly on a thread pool; output order matches input."""
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
