"""
Text sparse-matrix files: SMS and MatrixMarket coordinate.

SMS::

    nrows ncols M          (third token: "M" or an integer field size)
    i j v                  (1-based, any order, one entry per line)
    0 0 0                  (terminator)

MatrixMarket: ``coordinate`` files with ``integer``, ``real`` (integral
values only) or ``pattern`` fields and ``general``, ``symmetric`` or
``skew-symmetric`` symmetry.

Readers return a :class:`MatrixFile` holding 0-based :class:`Triplets`;
values are reduced into a ring only when the matrix is built.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IndexOutOfBounds, MissingTerminator, ParseError, UnsupportedVariant
from .matstore import Triplets, build_csr, to_csr

SMS = "sms"
MATRIX_MARKET = "mm"


@dataclass(frozen=True, eq=False)
class MatrixFile:
    path: str
    format: str
    triplets: Triplets
    header: str = ""

    @property
    def shape(self):
        return (self.triplets.nrows, self.triplets.ncols)

    @property
    def nbnz(self):
        return len(self.triplets)

    def matrix(self, ring):
        """Canonical CSR over ``ring`` (duplicates summed, zeros dropped)."""
        return build_csr(self.triplets, ring)


def _int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        f = float(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", lineno) from None
    if not np.isfinite(f) or f != int(f):
        raise ParseError(f"value {tok!r} is not an integer", lineno)
    return int(f)


def _lines(path):
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            yield lineno, raw.strip()


def _check_index(i, j, nrows, ncols, lineno):
    if not (1 <= i <= nrows and 1 <= j <= ncols):
        raise IndexOutOfBounds(f"line {lineno}: entry ({i}, {j}) outside a {nrows}x{ncols} matrix")


def _triplets(nrows, ncols, rows, cols, vals):
    if all(-(2**62) < v < 2**62 for v in vals):
        v = np.array(vals, dtype=np.int64)
    else:
        v = np.array(vals, dtype=object)
    return Triplets(nrows, ncols, np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), v)


def read_sms(path):
    it = _lines(path)
    header = None
    for lineno, line in it:
        if line:
            header = (lineno, line)
            break
    if header is None:
        raise ParseError("empty file", 1)
    lineno, line = header
    toks = line.split()
    if len(toks) != 3:
        raise ParseError(f"header must be 'nrows ncols M', got {line!r}", lineno)
    nrows, ncols = _int(toks[0], lineno), _int(toks[1], lineno)
    if nrows < 0 or ncols < 0:
        raise ParseError("negative dimension", lineno)
    if toks[2] != "M":
        _int(toks[2], lineno)
    rows, cols, vals = [], [], []
    for lineno, line in it:
        if not line:
            continue
        toks = line.split()
        if len(toks) != 3:
            raise ParseError(f"expected 'i j v', got {line!r}", lineno)
        i, j, v = (_int(t, lineno) for t in toks)
        if i == 0 and j == 0 and v == 0:
            return MatrixFile(str(path), SMS, _triplets(nrows, ncols, rows, cols, vals), line)
        _check_index(i, j, nrows, ncols, lineno)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
    raise MissingTerminator("file ends without the '0 0 0' terminator")


_FIELDS = ("integer", "real", "pattern")
_SYMMETRY = ("general", "symmetric", "skew-symmetric")


def read_matrix_market(path):
    it = _lines(path)
    try:
        lineno, banner = next(it)
    except StopIteration:
        raise ParseError("empty file", 1) from None
    toks = banner.lower().split()
    if len(toks) != 5 or toks[0] != "%%matrixmarket" or toks[1] != "matrix":
        raise ParseError(f"bad MatrixMarket banner {banner!r}", lineno)
    layout, field, symmetry = toks[2:]
    if layout != "coordinate":
        raise UnsupportedVariant(f"{layout} layout is not supported", lineno)
    if field not in _FIELDS:
        raise UnsupportedVariant(f"{field} field is not supported", lineno)
    if symmetry not in _SYMMETRY:
        raise UnsupportedVariant(f"{symmetry} symmetry is not supported", lineno)
    size = None
    for lineno, line in it:
        if line and not line.startswith("%"):
            size = (lineno, line.split())
            break
    if size is None:
        raise ParseError("missing size line", lineno)
    lineno, toks = size
    if len(toks) != 3:
        raise ParseError("size line must be 'nrows ncols nnz'", lineno)
    nrows, ncols, nnz = (_int(t, lineno) for t in toks)
    width = 2 if field == "pattern" else 3
    rows, cols, vals = [], [], []
    count = 0
    for lineno, line in it:
        if not line or line.startswith("%"):
            continue
        toks = line.split()
        if len(toks) != width:
            raise ParseError(f"expected {width} fields, got {line!r}", lineno)
        i, j = _int(toks[0], lineno), _int(toks[1], lineno)
        v = 1 if field == "pattern" else _int(toks[2], lineno)
        _check_index(i, j, nrows, ncols, lineno)
        count += 1
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if symmetry != "general" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(-v if symmetry == "skew-symmetric" else v)
    if count != nnz:
        raise ParseError(f"size line declares {nnz} entries, found {count}", lineno)
    return MatrixFile(str(path), MATRIX_MARKET, _triplets(nrows, ncols, rows, cols, vals), banner)


def detect_format(path):
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for line in fh:
            if line.strip():
                return MATRIX_MARKET if line.lstrip().startswith("%%") else SMS
    return SMS


def read_matrix(path, fmt=None):
    fmt = fmt or detect_format(path)
    if fmt == SMS:
        return read_sms(path)
    if fmt == MATRIX_MARKET:
        return read_matrix_market(path)
    raise ValueError(f"unknown matrix file format {fmt!r}")


def _entries(a):
    a = to_csr(a)
    return a.entry_rows + 1, a.colid + 1, a.ring.to_unsigned(a.data)


def write_sms(path, a):
    rows, cols, vals = _entries(a)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{a.shape[0]} {a.shape[1]} M\n")
        for i, j, v in zip(rows.tolist(), cols.tolist(), vals.tolist()):
            fh.write(f"{i} {j} {v}\n")
        fh.write("0 0 0\n")


def write_matrix_market(path, a):
    rows, cols, vals = _entries(a)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate integer general\n")
        fh.write(f"{a.shape[0]} {a.shape[1]} {len(vals)}\n")
        for i, j, v in zip(rows.tolist(), cols.tolist(), vals.tolist()):
            fh.write(f"{i} {j} {v}\n")


def write_matrix(path, a, fmt=None):
    if fmt is None:
        fmt = MATRIX_MARKET if Path(path).suffix.lower() in (".mtx", ".mm") else SMS
    (write_matrix_market if fmt == MATRIX_MARKET else write_sms)(path, a)
    return fmt
