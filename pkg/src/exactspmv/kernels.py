"""
Exact SpMV kernels over Z/mZ for every storage format.

All kernels compute ``y <- A x + y`` (or the multi-vector form) with values
accumulated in the carrier of an :class:`AccumulatorModel`.  Within a row the
products are summed in windows of ``mul_window`` terms; after each window the
accumulator is reduced, and the last reduction of a row leaves ``y[i]``
canonical.  Results are exact and therefore independent of ``workers``.

Vectors are 1-d int64 arrays; multi-vectors are (n, nvec) C-ordered arrays,
i.e. the nvec values of one row are contiguous.
"""

import numpy as np

from . import _parallel
from .errors import DimensionMismatch, UnsupportedBlockWidth
from .matstore import CooMatrix, CoosMatrix, CsrMatrix, EllMatrix, EllRMatrix
from .modring import AccumulatorModel, add_window, mul_window

DEFAULT_ACC = AccumulatorModel.WIDE_FLOAT
BLOCK_WIDTHS = (1, 4, 8, 16)


def _data_as(a, dtype):
    """Matrix values converted to a carrier dtype, cached on the (immutable) matrix."""
    cache = a.__dict__.setdefault("_carrier_data", {})
    if dtype not in cache:
        cache[dtype] = a.data.astype(dtype)
    return cache[dtype]


def _fold(yc, rows, pos, prod, ring, window):
    """Add ``prod`` into ``yc[rows]`` reducing after every ``window`` entries of a row.

    Entries must be grouped by row with ``pos`` counting 0, 1, ... inside each row.
    """
    if len(prod) == 0:
        return
    starts = np.flatnonzero(pos % window == 0)
    sums = np.add.reduceat(prod, starts, axis=0)
    seg_rows = rows[starts]
    seg_k = pos[starts] // window
    kmax = int(seg_k.max())
    if kmax == 0:
        yc[seg_rows] = ring.reduce_array(yc[seg_rows] + sums)
        return
    order = np.argsort(seg_k, kind="stable")
    bounds = np.searchsorted(seg_k[order], np.arange(kmax + 2))
    for k in range(kmax + 1):
        sel = order[bounds[k]:bounds[k + 1]]
        r = seg_rows[sel]
        yc[r] = ring.reduce_array(yc[r] + sums[sel])


def _products(d, xc, cols):
    xs = xc[cols]
    return d * xs if xs.ndim == 1 else d[:, None] * xs


def _row_range_kernel(a, row_start, entry_rows, entry_pos):
    """Kernel over row-grouped entries (CSR, COO); blocks are row ranges balanced by nnz."""

    def kernel(yc, xc, acc, workers):
        d = _data_as(a, acc.dtype)
        window = mul_window(a.ring, acc)

        def block(rng):
            k0, k1 = int(row_start[rng[0]]), int(row_start[rng[1]])
            if k1 > k0:
                prod = _products(d[k0:k1], xc, a.colid[k0:k1])
                _fold(yc, entry_rows[k0:k1], entry_pos[k0:k1], prod, a.ring, window)

        _parallel.run(block, _parallel.row_blocks(row_start, workers), workers)

    return kernel


def _csr(a):
    return _row_range_kernel(a, a.start, a.entry_rows, a.entry_pos)


def _coo_layout(a):
    cache = a.__dict__
    if "_row_start" not in cache:
        row_start = np.searchsorted(a.rowid, np.arange(a.nrows + 1), side="left")
        cache["_row_start"] = row_start
        cache["_entry_pos"] = np.arange(a.nnz) - row_start[a.rowid]
    return cache["_row_start"], cache["_entry_pos"]


def _coo(a):
    row_start, entry_pos = _coo_layout(a)
    return _row_range_kernel(a, row_start, a.rowid, entry_pos)


def _coos(a):
    def kernel(yc, xc, acc, workers):
        d = _data_as(a, acc.dtype)
        window = mul_window(a.ring, acc)

        def block(rng):
            k0, k1 = int(a.start[rng[0]]), int(a.start[rng[1]])
            if k1 > k0:
                prod = _products(d[k0:k1], xc, a.colid[k0:k1])
                _fold(yc, a.entry_rows[k0:k1], a.entry_pos[k0:k1], prod, a.ring, window)

        _parallel.run(block, _parallel.row_blocks(a.start, workers), workers)

    return kernel


def _ell(a):
    ragged = isinstance(a, EllRMatrix)

    def kernel(yc, xc, acc, workers):
        d = _data_as(a, acc.dtype)
        window = mul_window(a.ring, acc)
        ring = a.ring

        def block(rng):
            r0, r1 = rng
            limit = int(a.rownb[r0:r1].max()) if ragged and r1 > r0 else a.width
            for c0 in range(0, limit, window):
                c1 = min(c0 + window, limit)
                rows = np.arange(r0, r1)
                if ragged and c0 > 0:
                    rows = rows[a.rownb[r0:r1] > c0]
                cols = a.colid[rows, c0:c1]
                dd = d[rows, c0:c1]
                xs = xc[cols]
                prod = dd * xs if xs.ndim == 2 else dd[..., None] * xs
                yc[rows] = ring.reduce_array(yc[rows] + prod.sum(axis=1))

        _parallel.run(block, _parallel.even_blocks(a.nrows, workers), workers)

    return kernel


_KERNELS = {CsrMatrix: _csr, CooMatrix: _coo, CoosMatrix: _coos,
            EllMatrix: _ell, EllRMatrix: _ell}


def _kernel_for(a):
    try:
        return _KERNELS[type(a)](a)
    except KeyError:
        raise TypeError(f"no SpMV kernel for {type(a).__name__}") from None


def _check(y, a, x):
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] != a.ncols:
        raise DimensionMismatch(f"x has {x.shape[0]} rows, matrix has {a.ncols} columns")
    if y.shape[0] != a.nrows:
        raise DimensionMismatch(f"y has {y.shape[0]} rows, matrix has {a.nrows} rows")
    if x.shape[1:] != y.shape[1:]:
        raise DimensionMismatch(f"x block shape {x.shape} does not match y block shape {y.shape}")
    return y, x


def _run(kernel, y, x, acc, workers):
    yc = y.astype(acc.dtype)
    kernel(yc, x.astype(acc.dtype), acc, workers)
    return yc.astype(np.int64)


def spmv(y, a, x, acc=DEFAULT_ACC, workers=1):
    """Return ``A x + y`` with canonical entries; ``y`` is not modified."""
    y, x = _check(y, a, x)
    if x.ndim != 1:
        raise DimensionMismatch("spmv takes vectors; use spmm for blocks")
    return _run(_kernel_for(a), y, x, acc, workers)


def apply(a, x, acc=DEFAULT_ACC, workers=1):
    """Return ``A x``."""
    x = np.asarray(x, dtype=np.int64)
    return spmv(np.zeros(a.nrows, dtype=np.int64), a, x, acc, workers)


def _scale(ring, s, v):
    s = ring.reduce(s)
    if s == 1:
        return v
    return ring.reduce_array(np.asarray(v, dtype=np.int64) * s)


def spmv_general(y, a, x, alpha, beta, acc=DEFAULT_ACC, workers=1):
    """Return ``alpha A x + beta y`` by scaling x and y first."""
    y, x = _check(y, a, x)
    return spmv(_scale(a.ring, beta, y), a, _scale(a.ring, alpha, x), acc, workers)


def spmm(Y, a, X, alpha=1, beta=1, acc=DEFAULT_ACC, workers=1):
    """Return ``alpha A X + beta Y`` for (n, nvec) blocks.

    Widths 1, 4, 8 and 16 traverse the matrix once for the whole block; other
    widths fall back to one spmv per column.
    """
    Y, X = _check(Y, a, X)
    if X.ndim != 2:
        raise DimensionMismatch("spmm takes (n, nvec) blocks")
    nvec = X.shape[1]
    if nvec < 1:
        raise UnsupportedBlockWidth("block width must be at least 1")
    Y = _scale(a.ring, beta, Y)
    X = _scale(a.ring, alpha, X)
    if nvec not in BLOCK_WIDTHS:
        cols = [spmv(Y[:, j], a, X[:, j], acc, workers) for j in range(nvec)]
        return np.ascontiguousarray(np.stack(cols, axis=1))
    return _run(_kernel_for(a), np.ascontiguousarray(Y), np.ascontiguousarray(X), acc, workers)


def spmv_pattern(y, p, x, sign, ring, acc=DEFAULT_ACC, workers=1):
    """Return ``y + sign * P x`` where P is a 0/1 pattern; only additions are performed."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    y, x = _check(y, p, x)
    window = add_window(ring, acc)

    def kernel(yc, xc, acc, workers):
        def block(rng):
            k0, k1 = int(p.start[rng[0]]), int(p.start[rng[1]])
            if k1 > k0:
                xs = xc[p.colid[k0:k1]]
                _fold(yc, p.entry_rows[k0:k1], p.entry_pos[k0:k1], xs if sign > 0 else -xs,
                      ring, window)

        _parallel.run(block, _parallel.row_blocks(p.start, workers), workers)

    return _run(kernel, y, x, acc, workers)


def spmv_transpose(y, a, x, acc=DEFAULT_ACC, workers=1):
    """Return ``A^T x + y`` from the untransposed CSR by scattering into columns.

    Each worker owns a block of rows and a private column accumulator; the
    partial results are merged in block order with reduced additions.
    Accepts vectors or (n, nvec) blocks.
    """
    if not isinstance(a, CsrMatrix):
        raise TypeError("spmv_transpose needs a CsrMatrix")
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] != a.nrows or y.shape[0] != a.ncols or x.shape[1:] != y.shape[1:]:
        raise DimensionMismatch(
            f"transpose product of a {a.shape} matrix with x{x.shape} into y{y.shape}")
    ring = a.ring
    window = mul_window(ring, acc)
    d = _data_as(a, acc.dtype)
    xc = x.astype(acc.dtype)

    def block(rng):
        k0, k1 = int(a.start[rng[0]]), int(a.start[rng[1]])
        part = np.zeros(y.shape, dtype=acc.dtype)
        if k1 > k0:
            cols = a.colid[k0:k1]
            order = np.argsort(cols, kind="stable")
            cols = cols[order]
            prod = _products(d[k0:k1][order], xc, a.entry_rows[k0:k1][order])
            first = np.ones(len(cols), dtype=bool)
            first[1:] = cols[1:] != cols[:-1]
            group_start = np.maximum.accumulate(np.where(first, np.arange(len(cols)), 0))
            _fold(part, cols, np.arange(len(cols)) - group_start, prod, ring, window)
        return part

    parts = _parallel.run(block, _parallel.row_blocks(a.start, workers), workers)
    yc = y.astype(acc.dtype)
    for part in parts:
        yc = ring.reduce_array(yc + part)
    return yc.astype(np.int64)
