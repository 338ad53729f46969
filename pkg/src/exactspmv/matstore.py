"""
Immutable sparse matrix storage: COO, CSR, ELL, ELL_R, COO_S and structure-only
patterns, plus lossless conversions between them.

All values are canonical elements of the matrix's ring, kept as int64.  Stored
zeros are dropped when building from triplets; duplicate triplets are summed.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import IndexOutOfBounds, WidthTooSmall
from .modring import RingSpec

_I64 = np.int64


def _arr(a):
    a = np.asarray(a, dtype=_I64)
    a.setflags(write=False)
    return a


class _Sparse:
    _arrays = ()

    @property
    def nrows(self):
        return self.shape[0]

    @property
    def ncols(self):
        return self.shape[1]

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if self.shape != other.shape or getattr(self, "ring", None) != getattr(other, "ring", None):
            return False
        if getattr(self, "width", None) != getattr(other, "width", None):
            return False
        return all(np.array_equal(getattr(self, f), getattr(other, f)) for f in self._arrays)

    __hash__ = None

    def row_weights(self):
        return to_csr(self).row_weights()

    def __repr__(self):
        return f"{type(self).__name__}(shape={self.shape}, nnz={self.nnz}, ring={getattr(self, 'ring', None)})"


@dataclass(frozen=True, eq=False)
class Triplets:
    """Unvalidated (i, j, v) entries with declared dimensions."""

    nrows: int
    ncols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @classmethod
    def from_entries(cls, nrows, ncols, entries):
        entries = list(entries)
        rows = np.array([e[0] for e in entries], dtype=_I64)
        cols = np.array([e[1] for e in entries], dtype=_I64)
        vals = [int(e[2]) for e in entries]
        if all(-(2**62) < v < 2**62 for v in vals):
            vals = np.array(vals, dtype=_I64)
        else:
            vals = np.array(vals, dtype=object)
        return cls(int(nrows), int(ncols), rows, cols, vals)

    def __len__(self):
        return len(self.rows)

    def entries(self):
        return [(int(i), int(j), int(v)) for i, j, v in zip(self.rows, self.cols, self.vals)]


@dataclass(frozen=True, eq=False, repr=False)
class CooMatrix(_Sparse):
    shape: tuple
    ring: RingSpec
    rowid: np.ndarray
    colid: np.ndarray
    data: np.ndarray
    _arrays = ("rowid", "colid", "data")

    @property
    def nnz(self):
        return len(self.data)

    def to_dense(self):
        d = np.zeros(self.shape, dtype=_I64)
        d[self.rowid, self.colid] = self.data
        return d


@dataclass(frozen=True, eq=False, repr=False)
class CsrMatrix(_Sparse):
    shape: tuple
    ring: RingSpec
    start: np.ndarray
    colid: np.ndarray
    data: np.ndarray
    _arrays = ("start", "colid", "data")

    @property
    def nnz(self):
        return len(self.data)

    def row_weights(self):
        return np.diff(self.start)

    @cached_property
    def entry_rows(self):
        """Row index of every stored entry."""
        return np.repeat(np.arange(self.nrows, dtype=_I64), np.diff(self.start))

    @cached_property
    def entry_pos(self):
        """Position of every stored entry within its row."""
        return np.arange(self.nnz, dtype=_I64) - self.start[self.entry_rows]

    def to_dense(self):
        d = np.zeros(self.shape, dtype=_I64)
        d[self.entry_rows, self.colid] = self.data
        return d


@dataclass(frozen=True, eq=False, repr=False)
class EllMatrix(_Sparse):
    """Row-major ELLPACK; padding slots hold data 0 and colid 0."""

    shape: tuple
    ring: RingSpec
    width: int
    colid: np.ndarray
    data: np.ndarray
    _arrays = ("colid", "data")

    @property
    def nnz(self):
        return int(np.count_nonzero(self.data))

    def to_dense(self):
        d = np.zeros(self.shape, dtype=_I64)
        rows = np.repeat(np.arange(self.nrows), self.width).reshape(self.nrows, self.width)
        mask = self.data != 0
        d[rows[mask], self.colid[mask]] = self.data[mask]
        return d


@dataclass(frozen=True, eq=False, repr=False)
class EllRMatrix(EllMatrix):
    rownb: np.ndarray = None
    _arrays = ("colid", "data", "rownb")

    @property
    def nnz(self):
        return int(self.rownb.sum())

    def row_weights(self):
        return self.rownb.copy()


@dataclass(frozen=True, eq=False, repr=False)
class CoosMatrix(_Sparse):
    """CSR restricted to the non-empty rows, listed in ``rowid``."""

    shape: tuple
    ring: RingSpec
    rowid: np.ndarray
    start: np.ndarray
    colid: np.ndarray
    data: np.ndarray
    _arrays = ("rowid", "start", "colid", "data")

    @property
    def nnz(self):
        return len(self.data)

    @cached_property
    def entry_rows(self):
        return np.repeat(self.rowid, np.diff(self.start))

    @cached_property
    def entry_pos(self):
        local = np.repeat(np.arange(len(self.rowid), dtype=_I64), np.diff(self.start))
        return np.arange(self.nnz, dtype=_I64) - self.start[local]

    def to_dense(self):
        d = np.zeros(self.shape, dtype=_I64)
        d[self.entry_rows, self.colid] = self.data
        return d


@dataclass(frozen=True, eq=False, repr=False)
class PatternMatrix(_Sparse):
    """Structure only: every stored position stands for the same value (1 or -1).

    Laid out like COO_S so that extraction from a larger matrix does not pay for
    the rows it leaves empty.
    """

    shape: tuple
    rowid: np.ndarray
    start: np.ndarray
    colid: np.ndarray
    _arrays = ("rowid", "start", "colid")

    @property
    def nnz(self):
        return len(self.colid)

    @cached_property
    def entry_rows(self):
        return np.repeat(self.rowid, np.diff(self.start))

    @cached_property
    def entry_pos(self):
        local = np.repeat(np.arange(len(self.rowid), dtype=_I64), np.diff(self.start))
        return np.arange(self.nnz, dtype=_I64) - self.start[local]

    def row_weights(self):
        w = np.zeros(self.nrows, dtype=_I64)
        w[self.rowid] = np.diff(self.start)
        return w

    def to_dense(self):
        d = np.zeros(self.shape, dtype=_I64)
        d[self.entry_rows, self.colid] = 1
        return d


def _shape(nrows, ncols):
    return (int(nrows), int(ncols))


def build_coo(t, ring):
    """Canonical COO: sorted by (row, col), duplicates summed, zeros dropped."""
    rows = np.asarray(t.rows, dtype=_I64)
    cols = np.asarray(t.cols, dtype=_I64)
    if len(rows):
        bad = (rows < 0) | (rows >= t.nrows) | (cols < 0) | (cols >= t.ncols)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise IndexOutOfBounds(
                f"entry ({rows[k]}, {cols[k]}) outside a {t.nrows}x{t.ncols} matrix")
    vals = ring.to_unsigned(ring.canonical(t.vals)) if len(rows) else np.zeros(0, _I64)
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if len(rows):
        first = np.ones(len(rows), dtype=bool)
        first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(first)
        if len(starts) < len(rows):
            # unsigned residues < 2^26, so int64 sums of duplicates cannot overflow in practice
            vals = np.add.reduceat(vals, starts) % ring.modulus
            rows, cols = rows[starts], cols[starts]
    keep = vals != 0
    vals = ring.from_unsigned(vals[keep])
    return CooMatrix(_shape(t.nrows, t.ncols), ring, _arr(rows[keep]), _arr(cols[keep]), _arr(vals))


def build_csr(t, ring):
    return coo_to_csr(build_coo(t, ring))


def from_dense(dense, ring):
    dense = ring.canonical(np.asarray(dense))
    i, j = np.nonzero(dense)
    return coo_to_csr(CooMatrix(dense.shape, ring, _arr(i), _arr(j), _arr(dense[i, j])))


def coo_to_csr(a):
    counts = np.bincount(a.rowid, minlength=a.nrows) if a.nnz else np.zeros(a.nrows, _I64)
    start = np.zeros(a.nrows + 1, dtype=_I64)
    np.cumsum(counts, out=start[1:])
    return CsrMatrix(a.shape, a.ring, _arr(start), a.colid, a.data)


def csr_to_coo(a):
    return CooMatrix(a.shape, a.ring, _arr(a.entry_rows), a.colid, a.data)


def _ell_slots(a, w):
    weights = a.row_weights()
    maxw = int(weights.max()) if len(weights) else 0
    if w is None:
        w = maxw
    if w < maxw:
        raise WidthTooSmall(f"width {w} < max row weight {maxw}")
    colid = np.zeros((a.nrows, w), dtype=_I64)
    data = np.zeros((a.nrows, w), dtype=_I64)
    colid[a.entry_rows, a.entry_pos] = a.colid
    data[a.entry_rows, a.entry_pos] = a.data
    return int(w), colid, data, weights


def csr_to_ell(a, w=None):
    w, colid, data, _ = _ell_slots(a, w)
    return EllMatrix(a.shape, a.ring, w, _arr(colid), _arr(data))


def csr_to_ellr(a, w=None):
    w, colid, data, weights = _ell_slots(a, w)
    return EllRMatrix(a.shape, a.ring, w, _arr(colid), _arr(data), _arr(weights))


def csr_to_coos(a):
    weights = a.row_weights()
    rowid = np.flatnonzero(weights)
    start = np.zeros(len(rowid) + 1, dtype=_I64)
    np.cumsum(weights[rowid], out=start[1:])
    return CoosMatrix(a.shape, a.ring, _arr(rowid), _arr(start), a.colid, a.data)


def coos_to_csr(a):
    counts = np.zeros(a.nrows, dtype=_I64)
    counts[a.rowid] = np.diff(a.start)
    start = np.zeros(a.nrows + 1, dtype=_I64)
    np.cumsum(counts, out=start[1:])
    return CsrMatrix(a.shape, a.ring, _arr(start), a.colid, a.data)


def ell_to_csr(a):
    mask = a.data != 0
    if isinstance(a, EllRMatrix):
        mask = np.arange(a.width)[None, :] < a.rownb[:, None]
    start = np.zeros(a.nrows + 1, dtype=_I64)
    np.cumsum(mask.sum(axis=1), out=start[1:])
    return CsrMatrix(a.shape, a.ring, _arr(start), _arr(a.colid[mask]), _arr(a.data[mask]))


def to_csr(a):
    """Any stored format -> CSR (identity on CSR)."""
    if isinstance(a, CsrMatrix):
        return a
    if isinstance(a, CooMatrix):
        return coo_to_csr(a)
    if isinstance(a, CoosMatrix):
        return coos_to_csr(a)
    if isinstance(a, EllMatrix):
        return ell_to_csr(a)
    raise TypeError(f"cannot convert {type(a).__name__} to CSR")


def convert(a, fmt, width=None):
    """Convert to one of 'coo', 'csr', 'ell', 'ellr', 'coos'."""
    csr = to_csr(a)
    fmt = fmt.lower()
    if fmt == "csr":
        return csr
    if fmt == "coo":
        return csr_to_coo(csr)
    if fmt == "ell":
        return csr_to_ell(csr, width)
    if fmt == "ellr":
        return csr_to_ellr(csr, width)
    if fmt == "coos":
        return csr_to_coos(csr)
    raise ValueError(f"unknown format {fmt!r}")


def transpose(a):
    csr = to_csr(a)
    order = np.lexsort((csr.entry_rows, csr.colid))
    t = CooMatrix((csr.ncols, csr.nrows), csr.ring,
                  _arr(csr.colid[order]), _arr(csr.entry_rows[order]), _arr(csr.data[order]))
    return coo_to_csr(t)


def with_representation(a, representation):
    """Same matrix with values re-encoded for another representation of the same modulus."""
    csr = to_csr(a)
    ring = csr.ring.with_representation(representation)
    data = ring.from_unsigned(csr.ring.to_unsigned(csr.data))
    return CsrMatrix(csr.shape, ring, csr.start, csr.colid, _arr(data))


def pattern_from_positions(shape, rows, cols):
    """Pattern from row-sorted (row, col) positions."""
    rows = np.asarray(rows, dtype=_I64)
    cols = np.asarray(cols, dtype=_I64)
    if len(rows):
        first = np.ones(len(rows), dtype=bool)
        first[1:] = rows[1:] != rows[:-1]
        starts = np.flatnonzero(first)
        rowid = rows[starts]
        start = np.append(starts, len(rows))
    else:
        rowid = np.zeros(0, _I64)
        start = np.zeros(1, _I64)
    return PatternMatrix(_shape(*shape), _arr(rowid), _arr(start), _arr(cols))
