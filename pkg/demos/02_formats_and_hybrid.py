"""
One matrix, several storage formats, one answer.

A synthetic matrix with a few heavy rows and many +-1 entries is stored as
COO, CSR, ELL_R and COO_S, then split by the automatic plan chooser into a
hybrid of +-1 patterns, an ELL core and a sparse remainder.  Every product is
checked against CSR and timed.
"""

import time

import numpy as np

from exactspmv import kernels
from exactspmv.hybrid import analyze, build_hybrid, choose_plan
from exactspmv.matstore import Triplets, build_csr, convert
from exactspmv.modring import AccumulatorModel, RingSpec

p = 65521
ring = RingSpec(p)
rng = np.random.default_rng(1)
n = 20000
weights = np.minimum(rng.zipf(2.0, n) + 2, 2000)
rows = np.repeat(np.arange(n), weights)
cols = rng.integers(0, n, size=len(rows))
vals = np.where(rng.random(len(rows)) < 0.6, rng.choice([1, p - 1], size=len(rows)),
                rng.integers(2, p - 1, size=len(rows)))
a = build_csr(Triplets(n, n, rows, cols, vals), ring)

stats = analyze(a)
print(f"{n} x {n}, nnz {a.nnz}, max row weight {stats.max_weight}, "
      f"+-1 fraction {stats.pm1 / a.nnz:.2f}")
plan = choose_plan(stats, ring, AccumulatorModel.WIDE_FLOAT)
print("chosen plan:", plan)

x = ring.random(rng, n)
ref = kernels.apply(a, x)
ops = {fmt: convert(a, fmt) for fmt in ("coo", "csr", "ellr", "coos")}
ops["hybrid"] = build_hybrid(a, plan)
for name, op in ops.items():
    f = (lambda: op.apply(x)) if name == "hybrid" else (lambda: kernels.apply(op, x))
    y = f()
    t0 = time.perf_counter()
    for _ in range(10):
        f()
    dt = (time.perf_counter() - t0) / 10
    print(f"  {name:>6}: {dt * 1e3:7.2f} ms  {2 * a.nnz / dt / 1e6:8.1f} Mflops  "
          f"agrees={np.array_equal(y, ref)}")
if hasattr(ops["hybrid"], "pieces"):
    print("hybrid pieces:", ", ".join(type(pc.matrix).__name__ for pc in ops["hybrid"].pieces))
