"""
Rank of a sparse matrix without eliminating it.

A rank-deficient matrix is built as a product of two random thin factors,
then the rank is recovered from the projected sequence Y^T A^i Y: its minimal
matrix generator F has det F = x^k * (something with nonzero constant term),
and rank = deg det F - k.  The intermediate objects are printed along the way.
"""

import numpy as np

from exactspmv.blockseq import block_sequence, random_block
from exactspmv.bwrank import block_rank, det_codegree, precondition, sequence_length
from exactspmv.matstore import from_dense
from exactspmv.modring import RingSpec
from exactspmv.orderbasis import min_matrix_generator
from exactspmv.polymat import rank_scalar

p = 65521
rng = np.random.default_rng(7)
n, r, s = 60, 23, 4
U = rng.integers(0, p, size=(n, r))
V = rng.integers(0, p, size=(r, n))
dense = (U.astype(object).dot(V.astype(object)) % p).astype(np.int64)
a = from_dense(dense, RingSpec(p))
print(f"{n} x {n} matrix, nnz {a.nnz}, planted rank {r}, elimination rank "
      f"{rank_scalar(dense, p)}")

box = precondition(a, seed=1)
L = sequence_length(n, s)
Y = random_block(n, s, p, seed=2)
seq = block_sequence(box, Y, L)
print(f"projected sequence: {len(seq)} terms of size {s} x {s}")

gen = min_matrix_generator(seq)
print(f"generator row degrees {gen.row_degrees.tolist()}, deg det F = {gen.det_degree}")
k = det_codegree(gen.F, gen.det_degree)
print(f"codegree of det F = {k}  ->  rank estimate {gen.det_degree - k}")

report = block_rank(a, s=s, seed=0)
print("\nblock_rank report:")
for key, val in report.as_dict().items():
    if key != "attempts":
        print(f"  {key}: {val}")
