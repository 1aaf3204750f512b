"""Static and dynamic work partitioning over Python threads.

The kernels handed to these helpers are numba functions compiled with
``nogil=True``, so the threads really run concurrently.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Tuple


def available_cores() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def static_ranges(n_items: int, workers: int) -> List[Tuple[int, int]]:
    """Split ``range(n_items)`` into ``workers`` contiguous chunks.

    The first ``n_items % workers`` chunks get one extra item; when
    ``workers > n_items`` the trailing chunks are empty.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    base, extra = divmod(n_items, workers)
    ranges = []
    lo = 0
    for w in range(workers):
        hi = lo + base + (1 if w < extra else 0)
        ranges.append((lo, hi))
        lo = hi
    return ranges


class WorkerPool:
    """A fixed set of threads reused across timed repetitions."""

    def __init__(self, threads: int):
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.threads = threads
        self._executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def run_static(self, body: Callable[[int, int], None], n_items: int) -> None:
        """Call ``body(lo, hi)`` once per worker over contiguous chunks; returns after all finish."""
        if self._executor is None:
            body(0, n_items)
            return
        futures = [self._executor.submit(body, lo, hi) for lo, hi in static_ranges(n_items, self.threads)]
        for f in futures:
            f.result()

    def run_dynamic(self, body: Callable[[int], None], n_items: int) -> None:
        """Workers repeatedly claim the next item index from a shared counter (chunk of 1)."""
        if self._executor is None:
            for item in range(n_items):
                body(item)
            return
        counter = itertools.count()  # next() is atomic under the GIL

        def worker():
            while True:
                item = next(counter)
                if item >= n_items:
                    return
                body(item)

        futures = [self._executor.submit(worker) for _ in range(self.threads)]
        for f in futures:
            f.result()

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
