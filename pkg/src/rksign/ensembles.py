"""Shared helpers for ensemble sweeps.

Every per-sample computation in this package is a pure function of
(master_seed, sample_index, ...), so sweeps parallelize over the sample
index with no shared state.  Results are always reduced in sample order,
making output independent of worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

try:
    import threadpoolctl
except ImportError:
    threadpoolctl = None


def _single_threaded_blas():
    # Worker processes own one core each; a multithreaded BLAS underneath
    # them just thrashes (measured 2.3x slowdown on the annealing loop).
    if threadpoolctl is not None:
        threadpoolctl.threadpool_limits(1)


def map_samples(task, args_list, workers: int = 1) -> list:
    """Apply a picklable ``task`` to each argument tuple, in order."""
    if workers <= 1 or len(args_list) <= 1:
        return [task(args) for args in args_list]
    chunk = max(1, len(args_list) // (4 * workers))
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_single_threaded_blas
    ) as pool:
        return list(pool.map(task, args_list, chunksize=chunk))


def mean_and_stderr(values) -> tuple:
    """Sample mean and its standard error (ddof=1)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("empty sample")
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))
