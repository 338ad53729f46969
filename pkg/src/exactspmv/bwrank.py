"""
Monte Carlo rank of a sparse matrix over Z/pZ by block Wiedemann.

1. Precondition A into a square black box B with random nonzero diagonals
   (a Gram product for rectangular A).
2. Project the Krylov sequence of B on a random block Y: ``S_i = Y^T B^i Y``.
3. Compute the minimal matrix generator F of the sequence.
4. rank = deg det F - codeg det F, with det F recovered by evaluation at
   ``deg + 1`` points and interpolation.

The estimate of a single attempt never exceeds the true rank, so repeated
attempts are combined by taking the largest value; an attempt whose generator
or determinant is degenerate is discarded and re-randomized.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _parallel, kernels
from .blockseq import block_sequence, random_block
from .errors import (GeneratorNotFound, ModulusTooSmallForInterpolation, RetriesExhausted,
                     ZeroDeterminant)
from .matstore import to_csr, with_representation
from .modring import Representation, require_prime
from .orderbasis import PMBASIS_THRESHOLD, min_matrix_generator
from .polymat import det_scalar, interpolate, pm_eval

MAX_RETRIES = 3
SCHEMA = "exactspmv.rank/1"


@dataclass(frozen=True, eq=False)
class Preconditioner:
    d1: np.ndarray  # length = rows
    d2: np.ndarray  # length = cols
    seed: object = None


@dataclass(frozen=True, eq=False)
class PreconditionedBox:
    """Square black box built from ``M = D1 A D2``.

    ``normal=False``: B = M (A square).  ``normal=True``: B = M^T M, or
    M M^T when A has fewer rows than columns, so that B has the smaller
    dimension.  Applied as a composition of diagonal scalings and sparse
    products; A is never modified.
    """

    a: object
    pre: Preconditioner
    normal: bool

    @property
    def wide(self):
        return self.normal and self.a.nrows < self.a.ncols

    @property
    def shape(self):
        if not self.normal:
            return self.a.shape
        n = self.a.nrows if self.wide else self.a.ncols
        return (n, n)

    @property
    def ring(self):
        return self.a.ring

    def _scale(self, d, v):
        return self.ring.reduce_array(v * (d if v.ndim == 1 else d[:, None]))

    def _m(self, v, acc, workers):
        w = _product(self.a, self._scale(self.pre.d2, v), acc, workers)
        return self._scale(self.pre.d1, w)

    def _mt(self, v, acc, workers):
        w = self._scale(self.pre.d1, v)
        zero = np.zeros((self.a.ncols,) + w.shape[1:], dtype=np.int64)
        w = kernels.spmv_transpose(zero, self.a, w, acc, workers)
        return self._scale(self.pre.d2, w)

    def apply(self, v, acc=kernels.DEFAULT_ACC, workers=1):
        v = np.asarray(v, dtype=np.int64)
        if not self.normal:
            return self._m(v, acc, workers)
        if self.wide:
            return self._m(self._mt(v, acc, workers), acc, workers)
        return self._mt(self._m(v, acc, workers), acc, workers)


def _product(a, v, acc, workers):
    if v.ndim == 1:
        return kernels.apply(a, v, acc, workers)
    return kernels.spmm(np.zeros((a.nrows, v.shape[1]), dtype=np.int64), a, v, acc=acc,
                        workers=workers)


def _nonzero(rng, n, p):
    return rng.integers(1, p, size=n, dtype=np.int64)


def precondition(a, p=None, seed=None, normal=None, identity=False):
    """Wrap ``a`` into a square black box with random nonzero diagonal scalings.

    Square matrices give ``M = D1 A D2``; rectangular ones (or ``normal=True``)
    give the Gram product of M on its smaller side.  ``identity=True`` uses
    unit diagonals.
    """
    a = to_csr(a)
    p = a.ring.modulus if p is None else p
    require_prime(p)
    if p != a.ring.modulus:
        raise ValueError(f"matrix is over Z/{a.ring.modulus}Z, not Z/{p}Z")
    a = with_representation(a, Representation.UNSIGNED)
    rng = np.random.default_rng(seed)
    if identity:
        pre = Preconditioner(np.ones(a.nrows, np.int64), np.ones(a.ncols, np.int64), seed)
    else:
        pre = Preconditioner(_nonzero(rng, a.nrows, p), _nonzero(rng, a.ncols, p), seed)
    if normal is None:
        normal = a.nrows != a.ncols
    return PreconditionedBox(a, pre, bool(normal))


def det_degree(F):
    """Sum of the row degrees of a row-reduced F (= degree of det F)."""
    rd = F.row_degrees()
    return int(rd[rd >= 0].sum())


def det_polynomial(F, bound, workers=1):
    """Coefficients of det F (degree <= bound) by evaluation at 1..bound+1 and interpolation."""
    p = F.p
    if p <= bound + 1:
        raise ModulusTooSmallForInterpolation(
            f"need {bound + 1} distinct nonzero points, Z/{p}Z has {p - 1}")
    points = np.arange(1, bound + 2, dtype=np.int64)
    blocks = _parallel.even_blocks(len(points), workers)
    parts = _parallel.run(
        lambda rng: [det_scalar(pm_eval(F, x), p) for x in points[rng[0]:rng[1]]],
        blocks, workers)
    values = [v for part in parts for v in part]
    return interpolate(points, values, p)


def det_codegree(F, bound, workers=1):
    """Valuation of det F, for a determinant of degree at most ``bound``."""
    poly = det_polynomial(F, bound, workers)
    nz = np.flatnonzero(poly)
    if not len(nz):
        raise ZeroDeterminant("determinant vanished at every sample point")
    return int(nz[0])


@dataclass
class RankReport:
    rank: int
    rows: int
    cols: int
    modulus: int
    block_size: int
    length: int
    det_degree: int
    codegree: int
    retries: int
    seed: object
    confirmed: bool = True
    attempts: list = field(default_factory=list)

    def as_dict(self):
        d = {"schema": SCHEMA}
        d.update({k: getattr(self, k) for k in (
            "rank", "rows", "cols", "modulus", "block_size", "length", "det_degree",
            "codegree", "retries", "seed", "confirmed", "attempts")})
        return d


def sequence_length(n, s, degree_bound=None):
    nu = n if degree_bound is None else min(int(degree_bound), n)
    return 2 * math.ceil(nu / s) + 2


def _attempt(a, p, s, L, seed, normal, acc, workers, threshold):
    box_seed, y_seed = seed.spawn(2)
    box = precondition(a, p, box_seed, normal=normal)
    n = box.shape[0]
    Y = random_block(n, s, p, y_seed)
    seq = block_sequence(box, Y, L, acc, workers)
    gen = min_matrix_generator(seq, threshold, workers)
    deg = gen.det_degree
    poly = det_polynomial(gen.F, deg, workers)
    nz = np.flatnonzero(poly)
    if not len(nz):
        raise ZeroDeterminant("determinant vanished at every sample point")
    if int(nz[-1]) != deg:
        raise GeneratorNotFound("generator is not row reduced")
    return deg, int(nz[0])


def block_rank(a, p=None, s=4, seed=0, degree_bound=None, acc=kernels.DEFAULT_ACC,
               workers=1, confirmations=2, max_retries=MAX_RETRIES, normal=None,
               threshold=PMBASIS_THRESHOLD):
    """Monte Carlo rank of ``a`` modulo the prime ``p``.

    Attempts run with independent seeds derived from ``seed``.  The answer is
    the largest estimate seen; the loop stops once that value has come up
    ``confirmations`` times or ``1 + max_retries`` attempts have run.
    """
    a = to_csr(a)
    p = a.ring.modulus if p is None else int(p)
    require_prime(p)
    rows, cols = a.shape
    normal = (rows != cols) if normal is None else bool(normal)
    n = min(rows, cols) if normal else rows
    if n == 0 or a.nnz == 0:
        return RankReport(0, rows, cols, p, s, 0, 0, 0, 0, seed)
    if not 1 <= s <= n:
        raise ValueError(f"block size must be in [1, {n}]")
    L = sequence_length(n, s, degree_bound)
    seeds = np.random.SeedSequence(seed).spawn(1 + max_retries)
    results, log = [], []
    for k, sub in enumerate(seeds):
        try:
            deg, codeg = _attempt(a, p, s, L, sub, normal, acc, workers, threshold)
        except (GeneratorNotFound, ZeroDeterminant) as exc:
            log.append({"attempt": k, "error": type(exc).__name__})
            continue
        r = deg - codeg
        log.append({"attempt": k, "rank": r, "det_degree": deg, "codegree": codeg})
        results.append((r, deg, codeg))
        best = max(results)
        if sum(1 for x in results if x[0] == best[0]) >= confirmations:
            break
    if not results:
        raise RetriesExhausted(f"no valid generator after {len(seeds)} attempts")
    best = max(results)
    confirmed = sum(1 for x in results if x[0] == best[0]) >= confirmations
    return RankReport(min(best[0], rows, cols), rows, cols, p, s, L, best[1], best[2],
                      len(log) - 1, seed, confirmed, log)
