"""
Order bases (sigma-bases) of matrix power series and the minimal matrix
generator of a projected sequence.

For an a x b series G known modulo x^d, an order basis is a nonsingular a x a
polynomial matrix M with ``M G = 0 mod x^d`` and minimal row degrees.
:func:`mbasis` builds it one order at a time; :func:`pmbasis` splits the order
in halves and joins the two partial bases with one polynomial matrix product.
Both use the same deterministic pivoting rule, so they return the same basis.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GeneratorNotFound
from .modring import inv_mod, matmul_mod
from .polymat import PolyMat, pm_mul, rank_scalar

PMBASIS_THRESHOLD = 16


@dataclass(frozen=True, eq=False)
class SeriesApprox:
    """Truncated series: ``coeffs`` has shape (order, a, b); missing terms are zero."""

    coeffs: np.ndarray
    p: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.int64)
        if c.ndim != 3:
            raise ValueError("series coefficients must have shape (order, a, b)")
        object.__setattr__(self, "coeffs", c % self.p)

    @property
    def order(self):
        return len(self.coeffs)

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def padded(self, d):
        """Coefficients 0..d-1 (zero-padded or truncated)."""
        out = np.zeros((d,) + self.shape, dtype=np.int64)
        k = min(d, self.order)
        out[:k] = self.coeffs[:k]
        return out


@dataclass(frozen=True, eq=False)
class OrderBasis:
    basis: PolyMat
    degrees: np.ndarray  # shifted row degrees

    def leading_matrix(self):
        """Row i read at degree ``degrees[i]``."""
        a = self.basis.shape[0]
        out = np.zeros((a, a), dtype=np.int64)
        for i, di in enumerate(self.degrees):
            out[i] = self.basis[int(di)][i]
        return out

    def is_reduced(self):
        return rank_scalar(self.leading_matrix(), self.basis.p) == self.basis.shape[0]


def residual(m, g, d):
    """``M G mod x^d`` as an array of shape (d, rows, cols)."""
    gp = PolyMat(g.padded(d), g.p)
    prod = pm_mul(m.truncate(d), gp)
    out = np.zeros((d,) + prod.shape, dtype=np.int64)
    k = min(d, prod.degree + 1)
    out[:k] = prod.coeffs[:k]
    return out


def has_order(m, g, d):
    return not residual(m, g, d).any()


def _mbasis_core(R, shift, p):
    """Iterative order basis.

    ``R`` (d, a, b) holds the series; it is updated in place into the residual
    ``M G``, whose k-th coefficient is the discrepancy at step k.  Returns the
    coefficients of M (degree-major) and the final shifted degrees.
    """
    d, a, b = R.shape
    delta = np.array(shift, dtype=np.int64)
    M = np.zeros((d + 1, a, a), dtype=np.int64)
    M[0] = np.eye(a, dtype=np.int64)
    for k in range(d):
        disc = R[k]
        if not disc.any():
            continue
        used = np.zeros(a, dtype=bool)
        for j in range(b):
            col = disc[:, j]
            cand = np.flatnonzero((col != 0) & ~used)
            if not len(cand):
                continue
            piv = int(cand[np.lexsort((cand, delta[cand]))[0]])
            used[piv] = True
            others = cand[cand != piv]
            if len(others):
                f = col[others] * inv_mod(int(col[piv]), p) % p
                M[:, others] = (M[:, others] - f[None, :, None] * M[:, piv][:, None, :]) % p
                R[k:, others] = (R[k:, others] - f[None, :, None] * R[k:, piv][:, None, :]) % p
                disc = R[k]
        piv_rows = np.flatnonzero(used)
        # multiply pivot rows by x
        M[1:, piv_rows] = M[:-1, piv_rows]
        M[0, piv_rows] = 0
        R[k + 1:, piv_rows] = R[k:-1, piv_rows]
        R[k, piv_rows] = 0
        delta[piv_rows] += 1
    return M, delta


def mbasis(g, d, shift=None):
    """Order basis of ``g`` at order ``d`` built one coefficient at a time.

    Pivot rule: for each discrepancy column, the candidate row of smallest
    shifted degree (lowest index on ties) is the pivot; it clears the column in
    the other candidates and is then multiplied by x.
    """
    if d < 0:
        raise ValueError("order must be >= 0")
    a = g.shape[0]
    shift = np.zeros(a, dtype=np.int64) if shift is None else np.asarray(shift, np.int64)
    if d == 0:
        return OrderBasis(PolyMat.identity(a, g.p), shift.copy())
    M, delta = _mbasis_core(g.padded(d).copy(), shift, g.p)
    return OrderBasis(PolyMat(M, g.p), delta)


def pmbasis(g, d, threshold=PMBASIS_THRESHOLD, shift=None, workers=1):
    """Divide-and-conquer order basis; identical output to :func:`mbasis`."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    if d <= threshold:
        return mbasis(g, d, shift)
    h = (d + 1) // 2
    first = pmbasis(g, h, threshold, shift, workers)
    rest = residual(first.basis, g, d)[h:]
    second = pmbasis(SeriesApprox(rest, g.p), d - h, threshold, first.degrees, workers)
    return OrderBasis(pm_mul(second.basis, first.basis, workers), second.degrees)


@dataclass(frozen=True, eq=False)
class GeneratorResult:
    F: PolyMat
    row_degrees: np.ndarray
    det_degree: int
    flags: dict = field(default_factory=dict)


def generator_series(seq):
    """The stacked series ``[x S(x); -I]`` (order L+1) whose order basis yields the generator."""
    terms = seq.as_array() if hasattr(seq, "as_array") else np.asarray(seq, dtype=np.int64)
    L, s = terms.shape[0], terms.shape[1]
    p = seq.p
    G = np.zeros((L + 1, 2 * s, s), dtype=np.int64)
    G[0, s:] = (-np.eye(s, dtype=np.int64)) % p
    G[1:, :s] = terms
    return SeriesApprox(G, p)


def annihilates(F, degrees, terms, p):
    """Row-wise check: ``sum_j F_r,j S_(i+j) = 0`` for 0 <= i <= L-1-deg_r."""
    L = len(terms)
    for r, dr in enumerate(degrees):
        dr = int(dr)
        n_win = L - dr
        if n_win <= 0:
            continue
        coef = np.stack([F[j][r] for j in range(dr + 1)]).reshape(1, -1)
        for i in range(n_win):
            window = terms[i:i + dr + 1].reshape(-1, terms.shape[2])
            if matmul_mod(coef, window, p).any():
                return False
    return True


def min_matrix_generator(seq, threshold=PMBASIS_THRESHOLD, workers=1):
    """Minimal matrix generator F of ``S_0, ..., S_(L-1)``.

    F satisfies ``sum_j F_j S_(i+j) = 0`` for every window that fits in the
    sequence.  Row r of F is the reversal, with respect to its degree, of the
    left block of a selected row of an order basis of ``[x S(x); -I]``.
    Raises :class:`GeneratorNotFound` when the selected rows fail the check.
    """
    terms = seq.as_array()
    L = terms.shape[0]
    if L < 2:
        raise ValueError("need at least two sequence terms")
    s = terms.shape[1]
    p = seq.p
    ob = pmbasis(generator_series(seq), L + 1, threshold, workers=workers)
    M, delta = ob.basis, ob.degrees
    order = np.lexsort((np.arange(2 * s), delta))
    chosen, lead = [], np.zeros((0, s), dtype=np.int64)
    for r in order:
        cand = np.vstack([lead, M[0][r, :s][None]])
        if rank_scalar(cand, p) == len(cand):
            chosen.append(int(r))
            lead = cand
            if len(chosen) == s:
                break
    if len(chosen) < s:
        raise GeneratorNotFound("order basis has no invertible generator block")
    degrees = delta[chosen]
    if degrees.max() > L - 1:
        raise GeneratorNotFound("sequence too short to determine the generator")
    D = int(degrees.max())
    F = np.zeros((D + 1, s, s), dtype=np.int64)
    for i, (r, dr) in enumerate(zip(chosen, degrees)):
        for j in range(int(dr) + 1):
            F[j, i] = M[int(dr) - j][r, :s]
    F = PolyMat(F, p)
    if not annihilates(F, degrees, terms, p):
        raise GeneratorNotFound("selected generator does not annihilate the sequence")
    return GeneratorResult(F, degrees.copy(), int(degrees.sum()),
                           {"validated": True, "row_reduced": True, "order": L + 1})
