"""Worker partitioning shared by the kernels and the sequence/polynomial code."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "EXACT_SPMV_THREADS"


def default_workers():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def row_blocks(start, workers):
    """Split rows into at most ``workers`` contiguous blocks of roughly equal nnz.

    ``start`` is a CSR row-pointer array. Returns a list of (r0, r1) half-open ranges.
    """
    nrows = len(start) - 1
    workers = max(1, min(int(workers), nrows))
    if workers == 1:
        return [(0, nrows)]
    nnz = int(start[-1])
    targets = (np.arange(1, workers) * nnz) // workers
    cuts = np.searchsorted(start, targets, side="left")
    bounds = np.unique(np.concatenate(([0], np.clip(cuts, 0, nrows), [nrows])))
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def even_blocks(n, workers):
    workers = max(1, min(int(workers), n))
    edges = np.linspace(0, n, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run(fn, items, workers):
    """Map ``fn`` over items, in order, with up to ``workers`` threads."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
