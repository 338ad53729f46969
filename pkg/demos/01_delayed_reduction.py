"""
How many products can be summed before a reduction is needed?

For each carrier we print the product budget for a few moduli, then show a
row heavy enough to overflow a float32 accumulator if reduced naively, and
check that the windowed kernel still matches exact integer arithmetic.
"""

import numpy as np

from exactspmv import kernels
from exactspmv.errors import ModulusTooLarge
from exactspmv.matstore import from_dense
from exactspmv.modring import AccumulatorModel, Representation, RingSpec, budget_mul, mul_window

print("products summable before a reduction")
print(f"{'modulus':>10} {'repr':>9} " + " ".join(f"{a.name.lower():>12}" for a in AccumulatorModel))
for m in (251, 1009, 4093, 65521):
    for rep in Representation:
        ring = RingSpec(m, rep)
        cells = []
        for acc in AccumulatorModel:
            try:
                cells.append(f"{mul_window(ring, acc):>12}")
            except ModulusTooLarge:
                cells.append(f"{'-':>12}")
        print(f"{m:>10} {rep.value:>9} " + " ".join(cells))

m = 1009
ring = RingSpec(m)
narrow = AccumulatorModel.NARROW_FLOAT
b = budget_mul(ring, narrow)
ncols = 4 * b + 3
print(f"\nmodulus {m}: float32 holds {b} products of (m-1)^2 = {(m - 1) ** 2}")
print(f"one row of {ncols} entries equal to m-2, times x = (m-4, ..., m-4)")

a = from_dense(np.full((1, ncols), m - 2), ring)
x = np.full(ncols, m - 4)
naive = np.float32(0)
for _ in range(ncols):
    naive = np.float32(naive + np.float32((m - 2) * (m - 4)))
exact = ncols * (m - 2) * (m - 4) % m
print(f"  float32 sum, reduced once : {int(naive) % m}")
print(f"  windowed float32 kernel   : {int(kernels.apply(a, x, narrow)[0])}")
print(f"  exact                     : {exact}")
