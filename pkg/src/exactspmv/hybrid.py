"""
Hybrid storage: a matrix split into pieces that are each stored in the format
that suits them, and multiplied one after another into the same output.

Pieces, in order:

1. structure-only patterns holding the entries equal to 1 and to -1 (optional),
2. an ELL_R block holding the first ``w`` remaining entries of every row,
3. the remainder in CSR, COO or COO_S, optionally cut into column chunks so
   that no row of a chunk holds more than ``b`` entries.

The plan is picked by a small deterministic heuristic (:func:`choose_plan`);
its thresholds live in :class:`ChooserConfig`.
"""

from dataclasses import dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .errors import DimensionMismatch
from .matstore import (CsrMatrix, _arr, convert,
                       csr_to_ellr, pattern_from_positions, to_csr)
from .modring import mul_window

REMAINDER_FORMATS = ("csr", "coo", "coos")


@dataclass(frozen=True, eq=False)
class RowStats:
    nrows: int
    ncols: int
    nnz: int
    weights: np.ndarray
    max_weight: int
    mean_weight: float
    empty_rows: int
    histogram: np.ndarray
    pm1: int
    rest_weights: np.ndarray

    def as_dict(self):
        return {
            "nrows": self.nrows,
            "ncols": self.ncols,
            "nnz": self.nnz,
            "max_weight": self.max_weight,
            "mean_weight": self.mean_weight,
            "empty_rows": self.empty_rows,
            "pm1": self.pm1,
            "histogram": {int(w): int(c) for w, c in enumerate(self.histogram) if c},
        }


def _pm1_masks(a):
    u = a.ring.to_unsigned(a.data)
    plus = u == 1
    minus = (u == a.ring.modulus - 1) & ~plus
    return plus, minus


def analyze(a):
    a = to_csr(a)
    weights = a.row_weights()
    plus, minus = _pm1_masks(a)
    special = plus | minus
    rest_weights = weights - np.bincount(a.entry_rows[special], minlength=a.nrows)
    return RowStats(
        nrows=a.nrows,
        ncols=a.ncols,
        nnz=a.nnz,
        weights=weights,
        max_weight=int(weights.max()) if a.nrows else 0,
        mean_weight=float(weights.mean()) if a.nrows else 0.0,
        empty_rows=int(np.count_nonzero(weights == 0)),
        histogram=np.bincount(weights) if a.nrows else np.zeros(1, np.int64),
        pm1=int(special.sum()),
        rest_weights=rest_weights,
    )


@dataclass(frozen=True)
class ChooserConfig:
    fill_ratio: float = 0.8
    ell_min_nnz: int = 10_000
    ell_max_empty_fraction: float = 0.10
    coos_empty_fraction: float = 0.5
    coo_nnz_fraction: float = 0.05
    pm1_fraction: float = 0.25


DEFAULT_CONFIG = ChooserConfig()


@dataclass(frozen=True)
class Preferences:
    """User hints: force or forbid ±1 segregation, favour one format, force a chunk budget."""

    segregate_pm1: Optional[bool] = None
    priority: Optional[str] = None
    chunk_budget: Optional[int] = None


@dataclass(frozen=True)
class SplitPlan:
    segregate_pm1: bool = False
    ell_width: int = 0
    remainder_format: str = "csr"
    chunk_budget: int = 0

    def __post_init__(self):
        if self.remainder_format not in REMAINDER_FORMATS:
            raise ValueError(f"remainder_format must be one of {REMAINDER_FORMATS}")
        if self.ell_width < 0 or self.chunk_budget < 0:
            raise ValueError("ell_width and chunk_budget must be >= 0")

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name}={str(v).lower() if isinstance(v, bool) else v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        kw = {}
        types = {f.name: f.type for f in fields(cls)}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or key not in types:
                raise ValueError(f"bad plan line {raw!r}")
            if key == "segregate_pm1":
                if value.lower() not in ("true", "false", "1", "0"):
                    raise ValueError(f"bad boolean {value!r}")
                kw[key] = value.lower() in ("true", "1")
            elif key == "remainder_format":
                kw[key] = value.lower()
            else:
                kw[key] = int(value)
        return cls(**kw)


def _fill_ratios(weights, nrows):
    """fill[w-1] = sum(min(w, r_i)) / (nrows * w) for w = 1..max weight."""
    maxw = int(weights.max()) if len(weights) else 0
    if maxw == 0:
        return np.zeros(0)
    hist = np.bincount(weights, minlength=maxw + 1)
    # number of rows with weight > t, for t = 0..maxw-1
    longer = nrows - np.cumsum(hist)[:-1]
    covered = np.cumsum(longer)
    return covered / (nrows * np.arange(1, maxw + 1))


def choose_plan(stats, ring, acc, prefs=None, config=DEFAULT_CONFIG):
    """Pick a SplitPlan from row statistics; a pure function of its inputs."""
    prefs = prefs or Preferences()
    if prefs.priority is not None and prefs.priority not in ("ell",) + REMAINDER_FORMATS:
        raise ValueError(f"unknown priority format {prefs.priority!r}")
    nnz = stats.nnz
    if prefs.segregate_pm1 is not None:
        segregate = bool(prefs.segregate_pm1) and stats.pm1 > 0
    else:
        segregate = nnz > 0 and stats.pm1 >= config.pm1_fraction * nnz
    weights = stats.rest_weights if segregate else stats.weights
    rest_nnz = int(weights.sum())
    nrows = stats.nrows

    width = 0
    if rest_nnz > 0 and prefs.priority in (None, "ell"):
        empty = int(np.count_nonzero(weights == 0))
        big_and_full = (nnz >= config.ell_min_nnz
                        and empty <= config.ell_max_empty_fraction * nrows)
        if big_and_full or prefs.priority == "ell":
            fill = _fill_ratios(weights, nrows)
            ok = np.flatnonzero(fill >= config.fill_ratio)
            width = int(ok[-1]) + 1 if len(ok) else 1

    remainder = np.maximum(weights - width, 0)
    rem_nnz = int(remainder.sum())
    if prefs.priority in REMAINDER_FORMATS:
        fmt = prefs.priority
    elif rem_nnz == 0:
        fmt = "csr"
    elif np.count_nonzero(remainder == 0) > config.coos_empty_fraction * nrows:
        fmt = "coos"
    elif rem_nnz < config.coo_nnz_fraction * nnz:
        fmt = "coo"
    else:
        fmt = "csr"

    if prefs.chunk_budget is not None:
        chunk = int(prefs.chunk_budget)
    else:
        window = mul_window(ring, acc)
        longest = max(width, int(remainder.max()) if nrows else 0)
        chunk = window if longest > window else 0
    return SplitPlan(segregate, width, fmt, chunk)


class Piece(NamedTuple):
    matrix: object
    sign: Optional[int] = None  # +1/-1 for pattern pieces


@dataclass(frozen=True, eq=False)
class HybridMatrix:
    shape: tuple
    ring: object
    pieces: tuple
    plan: SplitPlan

    @property
    def nrows(self):
        return self.shape[0]

    @property
    def ncols(self):
        return self.shape[1]

    @property
    def nnz(self):
        return sum(p.matrix.nnz for p in self.pieces)

    def to_dense(self):
        d = np.zeros(self.shape, dtype=np.int64)
        for p in self.pieces:
            part = p.matrix.to_dense()
            d += part * p.sign if p.sign is not None else self.ring.to_unsigned(part)
        return self.ring.reduce(d)

    def describe(self):
        out = []
        for p in self.pieces:
            kind = type(p.matrix).__name__
            if p.sign is not None:
                kind += "(+1)" if p.sign > 0 else "(-1)"
            out.append({"piece": kind, "nnz": int(p.matrix.nnz)})
        return out

    def apply(self, X, acc=kernels.DEFAULT_ACC, workers=1):
        X = np.asarray(X, dtype=np.int64)
        return hybrid_spmv(np.zeros((self.nrows,) + X.shape[1:], dtype=np.int64), self, X,
                           acc, workers)


def extract_pm1(a):
    """Split into (plus pattern, minus pattern, rest).  For m = 2 every 1 goes to plus."""
    a = to_csr(a)
    plus, minus = _pm1_masks(a)
    rows = a.entry_rows
    p_plus = pattern_from_positions(a.shape, rows[plus], a.colid[plus])
    p_minus = pattern_from_positions(a.shape, rows[minus], a.colid[minus])
    return p_plus, p_minus, _select(a, ~(plus | minus))


def _select(a, keep):
    """Sub-matrix of a CSR holding the entries where ``keep`` is true."""
    start = np.zeros(a.nrows + 1, dtype=np.int64)
    np.cumsum(np.bincount(a.entry_rows[keep], minlength=a.nrows), out=start[1:])
    return CsrMatrix(a.shape, a.ring, _arr(start), _arr(a.colid[keep]), _arr(a.data[keep]))


def split_ell(a, w):
    """ELL_R piece with the first min(w, r_i) entries of each row, and the CSR remainder."""
    if w < 1:
        raise ValueError("ELL width must be >= 1")
    a = to_csr(a)
    head = a.entry_pos < w
    ell = csr_to_ellr(_select(a, head), w)
    return ell, _select(a, ~head)


def chunk_columns(a, b):
    """Cut every row into runs of at most ``b`` consecutive entries (by position in the row)."""
    if b < 1:
        raise ValueError("chunk budget must be >= 1")
    a = to_csr(a)
    if a.nnz == 0:
        return []
    npieces = -(-int(a.row_weights().max()) // b)
    if npieces == 1:
        return [a]
    which = a.entry_pos // b
    return [_select(a, which == k) for k in range(npieces)]


def build_hybrid(a, plan):
    a = to_csr(a)
    pieces = []
    rest = a
    if plan.segregate_pm1:
        plus, minus, rest = extract_pm1(a)
        pieces += [Piece(p, s) for p, s in ((plus, 1), (minus, -1)) if p.nnz]
    valued = []
    if plan.ell_width > 0 and rest.nnz:
        ell, rest = split_ell(rest, plan.ell_width)
        if ell.nnz:
            if plan.chunk_budget and plan.ell_width > plan.chunk_budget:
                valued += [csr_to_ellr(c) for c in chunk_columns(ell, plan.chunk_budget)]
            else:
                valued.append(ell)
    if rest.nnz:
        chunks = chunk_columns(rest, plan.chunk_budget) if plan.chunk_budget else [rest]
        valued += [convert(c, plan.remainder_format) for c in chunks]
    pieces += [Piece(m) for m in valued]
    return HybridMatrix(a.shape, a.ring, tuple(pieces), plan)


def hybrid_spmv(y, h, x, acc=kernels.DEFAULT_ACC, workers=1):
    """``y <- H x + y``: each piece's kernel in turn, every one leaving y reduced."""
    y = np.asarray(y, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    if x.shape[0] != h.ncols or y.shape[0] != h.nrows or x.shape[1:] != y.shape[1:]:
        raise DimensionMismatch(f"hybrid product of a {h.shape} matrix with x{x.shape} into y{y.shape}")
    for p in h.pieces:
        if p.sign is not None:
            y = kernels.spmv_pattern(y, p.matrix, x, p.sign, h.ring, acc, workers)
        elif x.ndim == 1:
            y = kernels.spmv(y, p.matrix, x, acc, workers)
        else:
            y = kernels.spmm(y, p.matrix, x, acc=acc, workers=workers)
    return y
