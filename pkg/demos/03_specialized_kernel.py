"""
Turning a fixed matrix into straight-line code.

The 2 x 2 example matrix is compiled into a list of multiply-add, add and
reduce instructions; the interpreter runs them, and the C emitter prints the
translation unit that a compiler would build.
"""

import numpy as np

from exactspmv.matstore import from_dense
from exactspmv.modring import AccumulatorModel, RingSpec
from exactspmv.specialize import compile_matrix, emit_source, run

a = from_dense([[2, 1], [0, 3]], RingSpec(27))
prog = compile_matrix(a, AccumulatorModel.NARROW_FLOAT)
print("instructions:")
for ins in prog.instructions:
    print("  ", ins)
print("A (1, 1) =", run(prog, np.zeros(2, np.int64), np.ones(2, np.int64)).tolist())

units = emit_source(prog)
print(f"\n{len(units) - 1} unit(s) plus a driver; first unit:\n")
print(units[0])
print("driver:\n")
print(units[-1])
