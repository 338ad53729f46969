import numpy as np
import pytest

from exactspmv.bwrank import (PreconditionedBox, RankReport, block_rank, det_codegree,
                              det_degree, det_polynomial, precondition, sequence_length)
from exactspmv.errors import (BadModulus, ModulusTooSmallForInterpolation, RetriesExhausted,
                              ZeroDeterminant)
from exactspmv.matstore import from_dense
from exactspmv.modring import Representation, RingSpec
from exactspmv.polymat import PolyMat

from oracles import matvec, planted_rank, random_dense, rank_mod

P = 65521


def mat(dense, p=P, rep=Representation.UNSIGNED):
    return from_dense(np.asarray(dense, dtype=np.int64), RingSpec(p, rep))


def test_identity_and_small_diagonal():
    assert block_rank(mat(np.eye(10, dtype=int)), s=2).rank == 10
    assert block_rank(mat(np.diag([1, 2, 0, 0])), s=1).rank == 2


def test_zero_and_empty():
    assert block_rank(mat(np.zeros((5, 5)))).rank == 0
    r = block_rank(mat(np.zeros((0, 3))))
    assert r.rank == 0 and r.cols == 3


@pytest.mark.parametrize("shape,r", [((30, 30), 7), ((30, 30), 30), ((40, 25), 12),
                                     ((20, 45), 9), ((16, 16), 1)])
def test_planted_rank(shape, r):
    rng = np.random.default_rng(shape[0] * 100 + r)
    dense = planted_rank(rng, shape[0], shape[1], r, P)
    assert rank_mod(dense, P) == r
    rep = block_rank(mat(dense), s=4, seed=1)
    assert rep.rank == r and rep.confirmed


@pytest.mark.parametrize("s", [1, 2, 3, 5, 8])
def test_block_size_invariance(s):
    rng = np.random.default_rng(5)
    dense = random_dense(rng, 24, 24, 0.15, P)
    want = rank_mod(dense, P)
    assert block_rank(mat(dense), s=s, seed=s).rank == want


def test_balanced_input_and_small_prime():
    rng = np.random.default_rng(6)
    dense = planted_rank(rng, 18, 18, 11, P)
    assert block_rank(mat(dense, rep=Representation.BALANCED), s=3).rank == 11
    q = 10007
    dense = planted_rank(rng, 15, 15, 6, q)
    assert block_rank(mat(dense, q), s=2).rank == 6


def test_normal_mode_on_nilpotent():
    n = 12
    shift = np.eye(n, k=1, dtype=np.int64)
    assert block_rank(mat(shift), s=2, normal=True).rank == n - 1


def test_report_fields():
    rep = block_rank(mat(np.eye(6, dtype=int)), s=2, seed=3)
    d = rep.as_dict()
    assert d["schema"] == "exactspmv.rank/1" and d["rank"] == 6
    assert rep.length == sequence_length(6, 2) == 8
    assert rep.det_degree - rep.codegree == 6
    assert isinstance(rep, RankReport) and rep.attempts


def test_determinism():
    rng = np.random.default_rng(8)
    a = mat(random_dense(rng, 30, 30, 0.1, P))
    r1 = block_rank(a, s=4, seed=42)
    r2 = block_rank(a, s=4, seed=42, workers=4)
    assert r1.as_dict() == r2.as_dict()


def test_argument_errors():
    with pytest.raises(BadModulus):
        block_rank(mat(np.eye(3, dtype=int), 27))
    with pytest.raises(ValueError):
        block_rank(mat(np.eye(3, dtype=int)), s=4)
    with pytest.raises(ValueError):
        block_rank(mat(np.eye(3, dtype=int)), s=0)
    with pytest.raises(ValueError):
        precondition(mat(np.eye(3, dtype=int)), p=101)


def test_retries_exhausted_on_tiny_field():
    # over Z/2 with a 1x1 projection most attempts see a degenerate sequence
    rng = np.random.default_rng(0)
    dense = random_dense(rng, 40, 40, 0.5, 2)
    a = mat(dense, 2)
    try:
        rep = block_rank(a, s=1, seed=0, max_retries=0)
    except (RetriesExhausted, ModulusTooSmallForInterpolation):
        return
    assert rep.rank <= rank_mod(dense, 2)


def test_sequence_length():
    assert sequence_length(100, 4) == 52
    assert sequence_length(100, 4, degree_bound=10) == 8
    assert sequence_length(7, 7) == 4


def test_det_degree_and_codegree():
    p = 101
    # diag(x, x^2)
    c = np.zeros((3, 2, 2), np.int64)
    c[1, 0, 0] = 1
    c[2, 1, 1] = 1
    F = PolyMat(c, p)
    assert det_degree(F) == 3
    assert det_polynomial(F, 3).tolist() == [0, 0, 0, 1]
    assert det_codegree(F, 3) == 3
    # diag(x + 1, x) -> det = x^2 + x
    c = np.zeros((2, 2, 2), np.int64)
    c[0, 0, 0] = 1
    c[1, 0, 0] = 1
    c[1, 1, 1] = 1
    assert det_codegree(PolyMat(c, p), 2) == 1
    with pytest.raises(ZeroDeterminant):
        det_codegree(PolyMat.zeros(2, 2, p), 2)
    with pytest.raises(ModulusTooSmallForInterpolation):
        det_polynomial(PolyMat(c, 3), 2)


@pytest.mark.parametrize("shape", [(7, 7), (9, 5), (4, 10)])
def test_preconditioned_box(shape):
    rng = np.random.default_rng(sum(shape))
    dense = random_dense(rng, shape[0], shape[1], 0.4, P)
    box = precondition(mat(dense), seed=1)
    assert isinstance(box, PreconditionedBox)
    M = (np.diag(box.pre.d1).astype(object).dot(dense.astype(object))
         .dot(np.diag(box.pre.d2).astype(object)) % P).astype(np.int64)
    if shape[0] == shape[1]:
        B = M
    elif shape[0] > shape[1]:
        B = matvec(M.T, M, P)
    else:
        B = matvec(M, M.T, P)
    assert box.shape == B.shape
    v = rng.integers(0, P, box.shape[1])
    assert np.array_equal(box.apply(v), matvec(B, v, P))
    V = rng.integers(0, P, (box.shape[1], 3))
    assert np.array_equal(box.apply(V), matvec(B, V, P))
    unit = precondition(mat(dense), identity=True)
    assert (unit.pre.d1 == 1).all() and (unit.pre.d2 == 1).all()
