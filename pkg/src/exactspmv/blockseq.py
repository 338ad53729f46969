"""
Iterated products with a fixed square black box: ``A^n x``, the Krylov
sequence ``{A^i x}`` and the projected block sequence ``S_i = Y^T A^i Y``.

A black box is anything with ``shape``, ``ring`` and either an
``apply(X, acc=, workers=)`` method (hybrid matrices, preconditioned boxes) or
a storage format understood by :mod:`exactspmv.kernels`.
"""

from dataclasses import dataclass

import numpy as np

from . import _parallel, kernels
from .errors import DimensionMismatch, NonSquare
from .modring import matmul_mod


@dataclass(frozen=True)
class SequenceSpec:
    length: int
    block_size: int
    seed: int = 0

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("sequence length must be >= 1")
        if self.block_size < 1:
            raise ValueError("block size must be >= 1")


@dataclass(frozen=True, eq=False)
class ProjSequence:
    terms: tuple  # s x s int64 arrays, canonical unsigned
    p: int

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    @property
    def block_size(self):
        return self.terms[0].shape[0] if self.terms else 0

    def as_array(self):
        return np.stack(self.terms) if self.terms else np.zeros((0, 0, 0), np.int64)

    def __eq__(self, other):
        if not isinstance(other, ProjSequence):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.as_array(), other.as_array())

    __hash__ = None


def _require_square(a):
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"iterated products need a square matrix, got {a.shape}")


def _apply(a, v, acc, workers):
    if hasattr(a, "apply"):
        return a.apply(v, acc=acc, workers=workers)
    if v.ndim == 1:
        return kernels.apply(a, v, acc, workers)
    return kernels.spmm(np.zeros(v.shape, dtype=np.int64), a, v, acc=acc, workers=workers)


def _check_vec(a, x):
    x = np.asarray(x, dtype=np.int64)
    if x.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"vector of length {x.shape[0]} for a {a.shape} matrix")
    return a.ring.canonical(x)


def pow_apply(a, x, n, acc=kernels.DEFAULT_ACC, workers=1):
    """``A^n x`` for a vector or an (n, k) block."""
    _require_square(a)
    if n < 0:
        raise ValueError("power must be >= 0")
    v = _check_vec(a, x)
    for _ in range(n):
        v = _apply(a, v, acc, workers)
    return v


def krylov_sequence(a, x, length, acc=kernels.DEFAULT_ACC, workers=1):
    """``[x, A x, ..., A^(L-1) x]``, each term computed from the previous one."""
    _require_square(a)
    if length < 1:
        raise ValueError("sequence length must be >= 1")
    v = _check_vec(a, x)
    out = [v]
    for _ in range(length - 1):
        v = _apply(a, v, acc, workers)
        out.append(v)
    return out


def random_block(n, s, p, seed):
    """Uniform n x s block over Z/pZ from a seeded generator."""
    if not 1 <= s:
        raise ValueError("block size must be >= 1")
    return np.random.default_rng(seed).integers(0, p, size=(n, s), dtype=np.int64)


def block_sequence(a, Y, length, acc=kernels.DEFAULT_ACC, workers=1):
    """``S_i = Y^T A^i Y`` for i < length, as a :class:`ProjSequence`.

    With several workers the columns of Y are split into sub-blocks that are
    iterated independently; the projections are then
    gathered column block by column block in a fixed order.
    """
    _require_square(a)
    if length < 1:
        raise ValueError("sequence length must be >= 1")
    Y = _check_vec(a, Y)
    if Y.ndim != 2:
        raise DimensionMismatch("Y must be an (n, s) block")
    p = a.ring.modulus
    s = Y.shape[1]
    Yt = a.ring.to_unsigned(Y).T.copy()

    blocks = _parallel.even_blocks(s, workers)
    inner = workers if len(blocks) == 1 else 1

    def iterate(cols):
        c0, c1 = cols
        v = np.ascontiguousarray(Y[:, c0:c1])
        block = np.empty((length, s, c1 - c0), dtype=np.int64)
        for i in range(length):
            if i:
                v = _apply(a, v, acc, inner)
            block[i] = matmul_mod(Yt, a.ring.to_unsigned(v), p)
        return block

    parts = _parallel.run(iterate, blocks, workers)
    S = np.concatenate(parts, axis=2)
    return ProjSequence(tuple(S[i] for i in range(length)), p)
