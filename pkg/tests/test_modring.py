import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exactspmv.errors import BadModulus, ModulusTooLarge
from exactspmv.modring import (AccumulatorModel, Representation, RingSpec, add_window,
                               budget_add, budget_mul, inv_mod, is_prime, matmul_mod,
                               mul_window)

NARROW, WIDE, WINT = (AccumulatorModel.NARROW_FLOAT, AccumulatorModel.WIDE_FLOAT,
                      AccumulatorModel.WIDE_INT)
BAL = Representation.BALANCED


def test_reduce_examples():
    assert RingSpec(27).reduce(30) == 3
    assert RingSpec(27).reduce(-1) == 26
    assert RingSpec(27, BAL).reduce(40) == 13


def test_balanced_range():
    r = RingSpec(27, BAL)
    assert (r.lo, r.hi) == (-13, 13)
    r = RingSpec(10, BAL)
    assert (r.lo, r.hi) == (-4, 5)
    vals = r.reduce_array(np.arange(-50, 50))
    assert vals.min() == -4 and vals.max() == 5


def test_invalid_moduli():
    with pytest.raises(BadModulus):
        RingSpec(1)
    with pytest.raises(ModulusTooLarge):
        RingSpec(2**26 + 2)
    RingSpec(2**26 + 1)


def test_budget_mul_examples():
    assert budget_mul(RingSpec(1009), NARROW) == 16
    assert budget_mul(RingSpec(65521), WIDE) == 2**53 // 65520**2
    assert budget_mul(RingSpec(2), NARROW) == 2**24


def test_budget_mul_balanced_is_twice():
    assert budget_mul(RingSpec(1009, BAL), NARROW) == 32


def test_budget_zero_raises():
    with pytest.raises(ModulusTooLarge):
        budget_mul(RingSpec(2**20 + 7), NARROW)


def test_budget_add_examples():
    assert budget_add(RingSpec(1009), NARROW) == 16644
    assert budget_add(RingSpec(2), NARROW) == 2**24


@pytest.mark.parametrize("m", [2, 3, 27, 251, 1009, 4097, 65521, 2**20 + 7])
@pytest.mark.parametrize("acc", [NARROW, WIDE, WINT])
@pytest.mark.parametrize("rep", list(Representation))
def test_worst_case_sum_fits(m, acc, rep):
    ring = RingSpec(m, rep)
    try:
        b = budget_mul(ring, acc)
    except ModulusTooLarge:
        assert (m - 1) ** 2 > acc.capacity or rep is BAL
        return
    h = ring.max_magnitude
    assert budget_add(ring, acc) >= b
    if h * h + h > acc.capacity:
        # one product fits but not on top of a residue: kernels refuse the pair
        with pytest.raises(ModulusTooLarge):
            mul_window(ring, acc)
        return
    w = mul_window(ring, acc)
    # a window of products on top of a canonical residue stays exact
    assert w * h * h + h <= acc.capacity
    assert add_window(ring, acc) * h + h <= acc.capacity
    if rep is Representation.UNSIGNED:
        assert b * (m - 1) ** 2 <= acc.capacity


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 2**20), st.integers(-(2**40), 2**40), st.integers(-(2**40), 2**40),
       st.booleans())
def test_reduce_is_a_morphism(m, a, b, balanced):
    r = RingSpec(m, BAL if balanced else Representation.UNSIGNED)
    assert r.reduce(r.reduce(a)) == r.reduce(a)
    assert r.reduce(a + b) == r.reduce(r.reduce(a) + r.reduce(b))
    assert r.reduce(a * b) == r.reduce(r.reduce(a) * r.reduce(b))
    u = RingSpec(m).reduce(a)
    assert (u - r.reduce(a)) in (0, m)
    assert r.lo <= r.reduce(a) <= r.hi


def test_accumulator_parse():
    assert AccumulatorModel.parse("float") is NARROW
    assert AccumulatorModel.parse("wide-float") is WIDE
    assert AccumulatorModel.parse("int64") is WINT


def test_prime_helpers():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert is_prime(65521) and is_prime(65537) and not is_prime(65535)
    assert inv_mod(3, 7) == 5


@pytest.mark.parametrize("p", [101, 65521, 2**26 + 1])
def test_matmul_mod_matches_python(p):
    rng = np.random.default_rng(p)
    a = rng.integers(0, p, size=(5, 300))
    b = rng.integers(0, p, size=(300, 4))
    want = (a.astype(object).dot(b.astype(object)) % p).astype(np.int64)
    assert np.array_equal(matmul_mod(a, b, p), want)
