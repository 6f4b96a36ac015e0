"""Replication helper honouring the RHAT_THREADS cap.

Results are collected by input order, so the thread count can never change
any output, only the wall-clock time.
"""

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["thread_count", "tmap"]


def thread_count():
    raw = os.environ.get("RHAT_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        return 1
    return max(1, min(k, os.cpu_count() or 1))


def tmap(fn, items):
    """Map ``fn`` over ``items`` preserving order, threaded when allowed."""
    items = list(items)
    k = thread_count()
    if k <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))
