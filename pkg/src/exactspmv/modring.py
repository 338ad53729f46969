"""
Arithmetic in Z/mZ and delayed-reduction budgets.

Elements are stored as machine integers in one of two canonical ranges:

* unsigned: [0, m-1]
* balanced: [-floor((m-1)/2), ceil((m-1)/2)]

Sums of products are accumulated in a carrier type (float32, float64 or
int64) and reduced only when the next term could exceed the carrier's exact
integer range.  ``budget_mul``/``budget_add`` give the number of terms that
fit starting from zero; the kernels use ``mul_window``/``add_window``, which
also reserve room for the residue already sitting in the accumulator.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadModulus, ModulusTooLarge

MAX_MODULUS = 2**26 + 1

# Balanced representation gets this many times the unsigned budget.
BALANCED_BUDGET_FACTOR = 2


class Representation(enum.Enum):
    UNSIGNED = "unsigned"
    BALANCED = "balanced"


class AccumulatorModel(enum.Enum):
    """Carrier used for exact accumulation, with its exact-integer capacity."""

    NARROW_FLOAT = ("float32", 2**24)
    WIDE_FLOAT = ("float64", 2**53)
    WIDE_INT = ("int64", 2**63 - 1)

    def __init__(self, dtype_name, capacity):
        self.dtype = np.dtype(dtype_name)
        self.capacity = capacity

    @classmethod
    def parse(cls, name):
        key = name.strip().upper().replace("-", "_")
        aliases = {"FLOAT": "NARROW_FLOAT", "FLOAT32": "NARROW_FLOAT",
                   "DOUBLE": "WIDE_FLOAT", "FLOAT64": "WIDE_FLOAT",
                   "INT": "WIDE_INT", "INT64": "WIDE_INT"}
        return cls[aliases.get(key, key)]


@dataclass(frozen=True)
class RingSpec:
    modulus: int
    representation: Representation = Representation.UNSIGNED

    def __post_init__(self):
        m = self.modulus
        if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
            raise BadModulus(f"modulus must be an integer, got {m!r}")
        object.__setattr__(self, "modulus", int(m))
        if m < 2:
            raise BadModulus(f"modulus must be >= 2, got {m}")
        if m > MAX_MODULUS:
            raise ModulusTooLarge(f"modulus {m} exceeds {MAX_MODULUS} (m-1 must be <= 2^26)")
        if not isinstance(self.representation, Representation):
            object.__setattr__(self, "representation", Representation(self.representation))

    @property
    def balanced(self):
        return self.representation is Representation.BALANCED

    @property
    def lo(self):
        return -((self.modulus - 1) // 2) if self.balanced else 0

    @property
    def hi(self):
        return self.modulus // 2 if self.balanced else self.modulus - 1

    @property
    def max_magnitude(self):
        """Largest |e| over canonical elements."""
        return max(-self.lo, self.hi)

    def with_representation(self, representation):
        return RingSpec(self.modulus, Representation(representation))

    def reduce(self, v):
        """Canonical representative of an integer (or integer-valued array)."""
        if isinstance(v, np.ndarray):
            return self.reduce_array(v)
        r = int(v) % self.modulus
        if self.balanced and r > self.hi:
            r -= self.modulus
        return r

    def reduce_array(self, v):
        """Reduce an integer-valued array in its own dtype; exact for |v| <= capacity."""
        m = v.dtype.type(self.modulus)
        r = np.remainder(v, m)
        if self.balanced:
            r = np.where(r > self.hi, r - m, r)
        return r

    def canonical(self, values):
        """Arbitrary Python/numpy integers -> canonical int64 array."""
        arr = np.asarray(values)
        if arr.dtype == object or (arr.dtype.kind in "iu" and arr.dtype.itemsize > 8):
            arr = np.array([int(v) % self.modulus for v in arr.ravel()],
                           dtype=np.int64).reshape(arr.shape)
        elif arr.dtype.kind == "f":
            if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
                raise ValueError("non-integer values cannot be mapped into Z/mZ")
            arr = arr.astype(np.int64)
        return self.reduce_array(arr.astype(np.int64, copy=False))

    def to_unsigned(self, values):
        arr = np.asarray(values, dtype=np.int64)
        return np.where(arr < 0, arr + self.modulus, arr)

    def from_unsigned(self, values):
        arr = np.asarray(values, dtype=np.int64)
        if self.balanced:
            return np.where(arr > self.hi, arr - self.modulus, arr)
        return arr

    def random(self, rng, size):
        return self.from_unsigned(rng.integers(0, self.modulus, size=size, dtype=np.int64))


def budget_mul(spec, acc):
    """Number of products of canonical elements that can be summed exactly from zero."""
    step = (spec.modulus - 1) ** 2
    b = acc.capacity // step
    if spec.balanced:
        h = spec.max_magnitude
        b = min(BALANCED_BUDGET_FACTOR * b, acc.capacity // (h * h))
    if b == 0:
        raise ModulusTooLarge(
            f"(m-1)^2 = {step} exceeds the {acc.name} capacity {acc.capacity}")
    return b


def budget_add(spec, acc):
    """Number of canonical elements that can be summed exactly from zero."""
    step = spec.modulus - 1
    b = acc.capacity // step
    if spec.balanced:
        h = spec.max_magnitude
        b = min(BALANCED_BUDGET_FACTOR * b, acc.capacity // h)
    if b == 0:
        raise ModulusTooLarge(f"m-1 = {step} exceeds the {acc.name} capacity")
    return b


def mul_window(spec, acc):
    """Products that can be added to an accumulator already holding a canonical residue.

    Never more than ``budget_mul``.
    """
    h = spec.max_magnitude
    w = min(budget_mul(spec, acc), (acc.capacity - h) // (h * h))
    if w < 1:
        raise ModulusTooLarge(
            f"{acc.name} cannot hold a residue plus one product for m={spec.modulus}")
    return w


def add_window(spec, acc):
    """Canonical elements that can be added to an accumulator holding a residue."""
    h = spec.max_magnitude
    w = min(budget_add(spec, acc), (acc.capacity - h) // h)
    if w < 1:
        raise ModulusTooLarge(f"{acc.name} too narrow for m={spec.modulus}")
    return w


def is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for f in range(3, math.isqrt(n) + 1, 2):
        if n % f == 0:
            return False
    return True


def require_prime(p):
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise BadModulus(f"{p!r} is not a prime")
    return int(p)


def inv_mod(a, p):
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse modulo {p}")
    return pow(a, -1, p)


def matmul_mod(a, b, p):
    """Exact (a @ b) mod p for canonical unsigned int64 operands (batched ok).

    Uses float64 BLAS when every partial sum stays below 2^53, otherwise int64
    products split along the inner dimension.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    inner = a.shape[-1]
    sq = (p - 1) ** 2
    if inner == 0:
        return a @ b
    f_chunk = (2**53) // sq
    if f_chunk >= inner:
        return np.remainder(a.astype(np.float64) @ b.astype(np.float64), p).astype(np.int64)
    i_chunk = (2**63 - 1 - p) // sq
    if f_chunk >= 64:
        af, bf = a.astype(np.float64), b.astype(np.float64)
        out = None
        for k in range(0, inner, f_chunk):
            part = np.remainder(af[..., k:k + f_chunk] @ bf[..., k:k + f_chunk, :], p)
            out = part if out is None else np.remainder(out + part, p)
        return out.astype(np.int64)
    out = None
    for k in range(0, inner, i_chunk):
        part = np.remainder(a[..., k:k + i_chunk] @ b[..., k:k + i_chunk, :], p)
        out = part if out is None else np.remainder(out + part, p)
    return out
