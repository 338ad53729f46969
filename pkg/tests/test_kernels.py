import numpy as np
import pytest

from exactspmv import kernels
from exactspmv.errors import DimensionMismatch, UnsupportedBlockWidth
from exactspmv.hybrid import extract_pm1
from exactspmv.matstore import convert, from_dense, pattern_from_positions, transpose
from exactspmv.modring import AccumulatorModel, Representation, RingSpec, mul_window

from oracles import matvec, random_dense

FORMATS = ("coo", "csr", "ell", "ellr", "coos")
ACCS = tuple(AccumulatorModel)
R27 = RingSpec(27)


def _acc_ok(ring, acc):
    try:
        mul_window(ring, acc)
        return True
    except ValueError:
        return False


@pytest.mark.parametrize("fmt", FORMATS)
def test_example_matrix(fmt):
    a = convert(from_dense([[2, 1], [0, 3]], R27), fmt)
    assert kernels.spmv(np.zeros(2, np.int64), a, np.ones(2, np.int64)).tolist() == [3, 3]


def test_zero_matrix_leaves_y():
    a = from_dense(np.zeros((3, 3)), R27)
    y = np.array([1, 2, 3])
    assert kernels.spmv(y, a, np.array([5, 5, 5])).tolist() == [1, 2, 3]


def test_apply_identity_and_zero():
    a = from_dense(np.eye(4, dtype=int), R27)
    x = np.array([1, 5, 7, 26])
    assert kernels.apply(a, x).tolist() == x.tolist()
    assert kernels.apply(a, np.zeros(4, np.int64)).tolist() == [0] * 4


def test_dimension_checks():
    a = from_dense([[1, 2, 3]], R27)
    with pytest.raises(DimensionMismatch):
        kernels.spmv(np.zeros(1, np.int64), a, np.zeros(2, np.int64))
    with pytest.raises(DimensionMismatch):
        kernels.spmv(np.zeros(2, np.int64), a, np.zeros(3, np.int64))
    with pytest.raises(UnsupportedBlockWidth):
        kernels.spmm(np.zeros((1, 0), np.int64), a, np.zeros((3, 0), np.int64))


@pytest.mark.parametrize("m", [2, 3, 251, 65521, 2**20 + 7])
@pytest.mark.parametrize("rep", list(Representation))
def test_all_formats_match_oracle(m, rep):
    ring = RingSpec(m, rep)
    rng = np.random.default_rng(m + 7)
    for _ in range(8):
        nr, nc = rng.integers(1, 64, size=2)
        dense = random_dense(rng, nr, nc, rng.uniform(0.01, 0.5), m)
        a = from_dense(dense, ring)
        x = ring.random(rng, nc)
        y = ring.random(rng, nr)
        want = matvec(dense, x, m, y)
        for fmt in FORMATS:
            b = convert(a, fmt)
            for acc in ACCS:
                if not _acc_ok(ring, acc):
                    continue
                got = kernels.spmv(y, b, x, acc)
                assert np.array_equal(ring.to_unsigned(got), want), (fmt, acc)
                assert ring.lo <= got.min() and got.max() <= ring.hi


def test_spmv_general_scaling():
    ring = RingSpec(251)
    rng = np.random.default_rng(1)
    dense = random_dense(rng, 20, 15, 0.3, 251)
    a = from_dense(dense, ring)
    x, y = ring.random(rng, 15), ring.random(rng, 20)
    for alpha, beta in [(1, 1), (0, 7), (3, 250), (-2, 0)]:
        want = (alpha * matvec(dense, x, 251) + beta * y) % 251
        assert np.array_equal(kernels.spmv_general(y, a, x, alpha, beta), want)
    assert np.array_equal(kernels.spmv_general(y, a, x, 0, 5), (5 * y) % 251)


def test_spmv_transpose():
    ring = RingSpec(65521, Representation.BALANCED)
    rng = np.random.default_rng(2)
    dense = random_dense(rng, 30, 17, 0.2, 65521)
    a = from_dense(dense, ring)
    x, y = ring.random(rng, 30), ring.random(rng, 17)
    want = matvec(dense.T, x, 65521, y)
    for workers in (1, 3):
        got = kernels.spmv_transpose(y, a, x, workers=workers)
        assert np.array_equal(ring.to_unsigned(got), want)
        assert np.array_equal(got, kernels.spmv(y, transpose(a), x))
    X = ring.random(rng, (30, 4))
    Y = ring.random(rng, (17, 4))
    assert np.array_equal(ring.to_unsigned(kernels.spmv_transpose(Y, a, X, workers=2)),
                          matvec(dense.T, X, 65521, Y))
    sym = from_dense(dense[:17, :17] + dense[:17, :17].T, ring)
    v = ring.random(rng, 17)
    assert np.array_equal(kernels.spmv_transpose(v, sym, v), kernels.spmv(v, sym, v))


@pytest.mark.parametrize("nvec", [1, 3, 4, 8, 16])
@pytest.mark.parametrize("fmt", FORMATS)
def test_spmm_matches_columns(fmt, nvec):
    ring = RingSpec(65521)
    rng = np.random.default_rng(nvec)
    dense = random_dense(rng, 25, 31, 0.2, 65521)
    a = convert(from_dense(dense, ring), fmt)
    X, Y = ring.random(rng, (31, nvec)), ring.random(rng, (25, nvec))
    got = kernels.spmm(Y, a, X, alpha=5, beta=3)
    for j in range(nvec):
        assert np.array_equal(got[:, j], kernels.spmv_general(Y[:, j], a, X[:, j], 5, 3))


def test_spmm_identity_basis_gives_columns():
    ring = RingSpec(251)
    rng = np.random.default_rng(3)
    dense = random_dense(rng, 10, 4, 0.5, 251)
    a = from_dense(dense, ring)
    out = kernels.spmm(np.zeros((10, 4), np.int64), a, np.eye(4, dtype=np.int64))
    assert np.array_equal(out, dense)


def test_spmv_pattern():
    ring = RingSpec(27)
    k = 40
    p = pattern_from_positions((1, k), np.zeros(k, np.int64), np.arange(k))
    x = np.ones(k, np.int64)
    y = np.zeros(1, np.int64)
    assert kernels.spmv_pattern(y, p, x, 1, ring).tolist() == [k % 27]
    assert kernels.spmv_pattern(y, p, x, -1, ring).tolist() == [(-k) % 27]
    empty = pattern_from_positions((1, k), np.zeros(0, np.int64), np.zeros(0, np.int64))
    assert kernels.spmv_pattern(np.array([4]), empty, x, 1, ring).tolist() == [4]


def test_pattern_pieces_rebuild_spmv():
    ring = RingSpec(5)
    a = from_dense([[1, 2], [4, 0]], ring)
    plus, minus, rest = extract_pm1(a)
    x = np.array([3, 4])
    y = kernels.spmv(np.zeros(2, np.int64), rest, x)
    y = kernels.spmv_pattern(y, plus, x, 1, ring)
    y = kernels.spmv_pattern(y, minus, x, -1, ring)
    assert np.array_equal(y, kernels.apply(a, x))


@pytest.mark.parametrize("rep", list(Representation))
@pytest.mark.parametrize("fmt", FORMATS)
def test_overflow_adversarial(fmt, rep):
    m = 1009
    ring = RingSpec(m, rep)
    b = mul_window(ring, AccumulatorModel.NARROW_FLOAT)
    ncols = 4 * b + 3
    dense = np.full((6, ncols), m - 1, dtype=np.int64)
    dense[1, ::2] = 0
    a = convert(from_dense(dense, ring), fmt)
    x = ring.canonical(np.full(ncols, m - 1))
    if rep is Representation.BALANCED:
        x = ring.canonical(np.full(ncols, ring.hi))
    y = ring.canonical(np.full(6, m - 1))
    narrow = kernels.spmv(y, a, x, AccumulatorModel.NARROW_FLOAT)
    wide = kernels.spmv(y, a, x, AccumulatorModel.WIDE_INT)
    assert np.array_equal(narrow, wide)
    assert np.array_equal(ring.to_unsigned(wide), matvec(dense, ring.to_unsigned(x), m, y))


@pytest.mark.parametrize("fmt", FORMATS)
def test_worker_determinism(fmt):
    ring = RingSpec(65521)
    rng = np.random.default_rng(11)
    dense = random_dense(rng, 200, 150, 0.05, 65521)
    dense[7, :] = rng.integers(1, 65521, 150)  # one heavy row
    a = convert(from_dense(dense, ring), fmt)
    x, y = ring.random(rng, 150), ring.random(rng, 200)
    X = ring.random(rng, (150, 8))
    base = kernels.spmv(y, a, x, workers=1)
    base_m = kernels.spmm(np.zeros((200, 8), np.int64), a, X, workers=1)
    for w in (2, 4, 8):
        assert kernels.spmv(y, a, x, workers=w).tobytes() == base.tobytes()
        assert kernels.spmm(np.zeros((200, 8), np.int64), a, X, workers=w).tobytes() == \
            base_m.tobytes()
