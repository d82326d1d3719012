"""Process-wide BLAS thread pinning for the training/estimation hot loops.

The network's matrices are small enough that multithreaded BLAS loses to
its own synchronization overhead; parallelism belongs at the per-seed
level instead.  Only the outermost context actually touches the pools, so
nested use from worker threads is safe.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager

from threadpoolctl import threadpool_limits

_lock = threading.Lock()
_depth = 0


@contextmanager
def pinned_blas():
    global _depth
    with _lock:
        ctx = threadpool_limits(limits=1, user_api="blas") if _depth == 0 else None
        _depth += 1
    try:
        yield
    finally:
        with _lock:
            _depth -= 1
            if ctx is not None:
                ctx.__exit__(None, None, None)
