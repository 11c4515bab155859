"""Shared worker pools, one per requested size.

The compiled kernels release the GIL, so plain thread pools give real
parallelism.  Pools are cached per size because the hot paths dispatch
many short waves; spawning threads per call would dominate the work.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor

_LOCK = threading.Lock()
_POOLS: dict[int, ThreadPoolExecutor] = {}


def shared_pool(workers: int) -> ThreadPoolExecutor:
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    with _LOCK:
        pool = _POOLS.get(workers)
        if pool is None:
            pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix=f"zone{workers}")
            _POOLS[workers] = pool
        return pool
