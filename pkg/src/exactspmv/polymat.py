"""
Dense polynomial matrices over Z/pZ.

A :class:`PolyMat` stores its coefficients degree-major in an int64 array of
shape (d+1, rows, cols), entries in [0, p-1].  Products go through evaluation
at the powers of a root of unity (number-theoretic transform), a pointwise
product of N scalar matrices, and interpolation back, whenever the prime has a
large enough power-of-two root of unity; otherwise through the schoolbook
convolution.  Both paths return identical results.
"""

from dataclasses import dataclass

import numpy as np

from . import _parallel
from .errors import (CountMismatch, DimensionMismatch, DuplicatePoints, NonSquare,
                     OrderTooSmall)
from .modring import inv_mod, matmul_mod


@dataclass(frozen=True, eq=False)
class PolyMat:
    coeffs: np.ndarray
    p: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.int64) % self.p
        if c.ndim != 3:
            raise ValueError("coefficients must have shape (d+1, rows, cols)")
        nz = np.flatnonzero(c.reshape(len(c), -1).any(axis=1))
        c = c[: int(nz[-1]) + 1] if len(nz) else c[:1]
        if len(c) == 0:
            c = np.zeros((1,) + c.shape[1:], dtype=np.int64)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "p", int(self.p))

    @classmethod
    def zeros(cls, rows, cols, p):
        return cls(np.zeros((1, rows, cols), dtype=np.int64), p)

    @classmethod
    def identity(cls, n, p):
        return cls(np.eye(n, dtype=np.int64)[None], p)

    @classmethod
    def from_scalar(cls, mat, p):
        return cls(np.asarray(mat, dtype=np.int64)[None], p)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def is_zero(self):
        return not self.coeffs.any()

    def __eq__(self, other):
        if not isinstance(other, PolyMat):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __getitem__(self, k):
        """k-th coefficient matrix (zero beyond the degree)."""
        if k > self.degree:
            return np.zeros(self.shape, dtype=np.int64)
        return self.coeffs[k]

    def row_degrees(self):
        """Degree of every row (-1 for a zero row)."""
        nz = self.coeffs.any(axis=2)  # (d+1, rows)
        out = np.full(self.shape[0], -1, dtype=np.int64)
        for i in range(self.shape[0]):
            idx = np.flatnonzero(nz[:, i])
            if len(idx):
                out[i] = idx[-1]
        return out

    def truncate(self, n):
        """Coefficients of degree < n."""
        return PolyMat(self.coeffs[:max(n, 1)] if n > 0 else np.zeros((1,) + self.shape, np.int64),
                       self.p)

    def __add__(self, other):
        d = max(self.degree, other.degree) + 1
        c = np.zeros((d,) + self.shape, dtype=np.int64)
        c[: self.degree + 1] += self.coeffs
        c[: other.degree + 1] += other.coeffs
        return PolyMat(c % self.p, self.p)

    def __neg__(self):
        return PolyMat((-self.coeffs) % self.p, self.p)

    def __sub__(self, other):
        return self + (-other)


@dataclass(frozen=True)
class RootOfUnity:
    p: int
    order: int
    value: int


def _is_pow2(n):
    return n >= 1 and n & (n - 1) == 0


def find_root(p, n):
    """A primitive n-th root of unity mod the prime p, or None if n does not divide p-1."""
    if not _is_pow2(n):
        raise ValueError(f"order {n} is not a power of two")
    if n == 1:
        return RootOfUnity(p, 1, 1)
    if (p - 1) % n:
        return None
    e = (p - 1) // n
    for g in range(2, p):
        w = pow(g, e, p)
        if pow(w, n // 2, p) != 1:
            return RootOfUnity(p, n, w)
    return None


def _bit_reverse(n):
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def ntt(a, root, inverse=False):
    """Length-N transform along axis 0 (N = root.order), iterative radix-2.

    Forward: A[k] = sum_j a[j] w^(jk).  Inverse includes the 1/N scaling.
    """
    p, n = root.p, root.order
    a = np.asarray(a, dtype=np.int64)
    if a.shape[0] != n:
        raise ValueError(f"transform length {a.shape[0]} != root order {n}")
    w = inv_mod(root.value, p) if inverse else root.value
    a = a[_bit_reverse(n)] % p
    length = 2
    while length <= n:
        half = length // 2
        wl = pow(w, n // length, p)
        tw = np.ones(half, dtype=np.int64)
        for j in range(1, half):
            tw[j] = tw[j - 1] * wl % p
        tw = tw.reshape((1, half) + (1,) * (a.ndim - 1))
        blocks = a.reshape((n // length, length) + a.shape[1:])
        u = blocks[:, :half]
        v = blocks[:, half:] * tw % p
        a = np.concatenate(((u + v) % p, (u - v) % p), axis=1).reshape(a.shape)
        length *= 2
    if inverse:
        a = a * inv_mod(n, p) % p
    return a


def pm_mul_naive(a, b):
    """Schoolbook product: C_k = sum_{i+j=k} A_i B_j."""
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    p = a.p
    da, db = a.degree, b.degree
    c = np.zeros((da + db + 1, a.shape[0], b.shape[1]), dtype=np.int64)
    for i in range(da + 1):
        if a.coeffs[i].any():
            c[i:i + db + 1] = (c[i:i + db + 1] + matmul_mod(a.coeffs[i][None], b.coeffs, p)) % p
    return PolyMat(c, p)


def pm_mul_fft(a, b, root, workers=1):
    """Product by evaluation at the N powers of ``root``, pointwise products, interpolation."""
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    n = root.order
    if n < a.degree + b.degree + 1:
        raise OrderTooSmall(f"root order {n} < product length {a.degree + b.degree + 1}")
    p = a.p

    def transform(c, inverse=False):
        flat = c.reshape(n, -1)
        out = np.empty_like(flat)

        def part(rng):
            out[:, rng[0]:rng[1]] = ntt(flat[:, rng[0]:rng[1]], root, inverse)

        _parallel.run(part, _parallel.even_blocks(flat.shape[1], workers), workers)
        return out.reshape(c.shape)

    def padded(m):
        c = np.zeros((n,) + m.shape, dtype=np.int64)
        c[: m.degree + 1] = m.coeffs
        return c

    fa = transform(padded(a))
    fb = transform(padded(b))
    fc = np.empty((n, a.shape[0], b.shape[1]), dtype=np.int64)

    def pointwise(rng):
        fc[rng[0]:rng[1]] = matmul_mod(fa[rng[0]:rng[1]], fb[rng[0]:rng[1]], p)

    _parallel.run(pointwise, _parallel.even_blocks(n, workers), workers)
    c = transform(fc, inverse=True)
    return PolyMat(c[: a.degree + b.degree + 1], p)


def _next_pow2(n):
    return 1 << max(0, (n - 1).bit_length())


def pm_mul(a, b, workers=1):
    """Product of polynomial matrices; transform-based when the prime allows it."""
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    if a.degree == 0 and b.degree == 0:
        return PolyMat(matmul_mod(a.coeffs[0], b.coeffs[0], a.p)[None], a.p)
    length = a.degree + b.degree + 1
    root = find_root(a.p, _next_pow2(length))
    if root is None or min(a.degree, b.degree) < 4:
        return pm_mul_naive(a, b)
    return pm_mul_fft(a, b, root, workers)


def pm_eval(a, point):
    """Horner evaluation of every entry at ``point``."""
    p = a.p
    point = int(point) % p
    acc = np.zeros(a.shape, dtype=np.int64)
    for k in range(a.degree, -1, -1):
        acc = (acc * point + a.coeffs[k]) % p
    return acc


def pm_eval_many(a, points):
    """Evaluations at several points at once: shape (len(points), rows, cols)."""
    p = a.p
    pts = np.asarray(points, dtype=np.int64) % p
    acc = np.zeros((len(pts),) + a.shape, dtype=np.int64)
    for k in range(a.degree, -1, -1):
        acc = (acc * pts[:, None, None] + a.coeffs[k]) % p
    return acc


def det_scalar(mat, p):
    """Determinant mod the prime p by elimination with nonzero-pivot search."""
    m = np.array(mat, dtype=np.int64) % p
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"determinant of a {m.shape} matrix")
    n = m.shape[0]
    det = 1
    for c in range(n):
        nz = np.flatnonzero(m[c:, c])
        if not len(nz):
            return 0
        r = c + int(nz[0])
        if r != c:
            m[[c, r]] = m[[r, c]]
            det = -det
        piv = int(m[c, c])
        det = det * piv % p
        if c + 1 < n:
            f = m[c + 1:, c] * inv_mod(piv, p) % p
            m[c + 1:, c:] = (m[c + 1:, c:] - f[:, None] * m[c, c:][None, :]) % p
    return det % p


def rank_scalar(mat, p):
    """Rank mod the prime p by Gaussian elimination."""
    m = np.array(mat, dtype=np.int64) % p
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if not len(nz):
            continue
        k = r + int(nz[0])
        if k != r:
            m[[r, k]] = m[[k, r]]
        inv = inv_mod(m[r, c], p)
        m[r] = m[r] * inv % p
        below = m[r + 1:, c].copy()
        m[r + 1:] = (m[r + 1:] - below[:, None] * m[r][None, :]) % p
        r += 1
    return r


def interpolate(points, values, p):
    """Coefficients (low degree first, length len(points)) of the interpolating polynomial."""
    xs = np.asarray(points, dtype=np.int64) % p
    ys = np.asarray(values, dtype=np.int64) % p
    n = len(xs)
    if len(ys) != n:
        raise CountMismatch(f"{n} points but {len(ys)} values")
    if len(np.unique(xs)) != n:
        raise DuplicatePoints("interpolation points must be pairwise distinct")
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    # Newton divided differences
    coef = ys.copy()
    for k in range(1, n):
        diff = (xs[k:] - xs[:-k]) % p
        inv = np.array([inv_mod(int(d), p) for d in diff], dtype=np.int64)
        coef[k:] = (coef[k:] - coef[k - 1:-1]) % p * inv % p
    # Newton form -> monomial basis (Horner from the top)
    poly = np.zeros(n, dtype=np.int64)
    poly[0] = coef[-1]
    deg = 0
    for k in range(n - 2, -1, -1):
        # poly <- poly * (x - xs[k]) + coef[k]
        shifted = np.zeros(n, dtype=np.int64)
        shifted[1:deg + 2] = poly[:deg + 1]
        shifted[:deg + 1] = (shifted[:deg + 1] - xs[k] * poly[:deg + 1]) % p
        shifted[0] = (shifted[0] + coef[k]) % p
        poly = shifted
        deg += 1
    return poly % p
