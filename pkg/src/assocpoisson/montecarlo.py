"""Replicate loop shared by every Monte Carlo experiment.

Replicate ``r`` is always sampled with ``derive_seed(master_seed, r)`` and
replicates are grouped into chunks whose boundaries depend only on the
window size, so the per-replicate results (and anything reduced from them
in replicate order) are identical for any thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .field import sample_batch, y_window
from .rng import check_seed, derive_seed

THREADS_ENV = "ASSOCPOISSON_THREADS"
CHUNK_SITES = 2_000_000


def thread_count():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def chunk_bounds(replicates, window_sites):
    step = max(1, CHUNK_SITES // max(1, window_sites))
    return [(lo, min(lo + step, replicates)) for lo in range(0, replicates, step)]


def map_replicates(spec, window, master_seed, replicates, stat, threads=None):
    """Apply ``stat`` to batches of sampled X arrays; concatenate in replicate order.

    ``stat`` receives an array of shape ``(batch,) + window.shape`` and must
    return an array whose first axis has length ``batch``.
    """
    master_seed = check_seed(master_seed)
    bounds = chunk_bounds(replicates, y_window(spec, window).size)

    def run(bound):
        lo, hi = bound
        seeds = derive_seed(master_seed, np.arange(lo, hi, dtype=np.uint64))
        x, _ = sample_batch(spec, window, seeds)
        return np.asarray(stat(x))

    threads = threads or thread_count()
    if threads == 1 or len(bounds) == 1:
        parts = [run(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, bounds))
    return np.concatenate(parts, axis=0)
