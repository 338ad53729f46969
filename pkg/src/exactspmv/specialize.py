"""
Matrix-specialized SpMV: compile one fixed matrix into a straight-line program.

Every stored entry becomes one instruction on ``y[i]``: an addition for 1, a
subtraction for -1 and a multiply-add otherwise.  ``Reduce`` instructions are
placed at the end of each row and wherever the next instruction would push the
accumulator past the carrier's exact range.  Programs run in-process through
:func:`run`; :func:`emit_source` writes equivalent C for ahead-of-time builds.

Emitted dialect (one translation unit per text chunk)::

    typedef float elem;                       /* carrier type */
    #define REDUCE(v) fmod((v), 27)            /* or the balanced/int64 variant */
    void spmv_unit0(elem *y, const elem *x) { y[0] += 2*x[0]; ... }
    void spmv(elem *y, const elem *x) { spmv_unit0(y, x); ... }   /* driver */
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _parallel
from .errors import DimensionMismatch
from .matstore import to_csr
from .modring import AccumulatorModel, add_window, mul_window


class AddMul(NamedTuple):
    row: int
    coef: int
    col: int


class Add(NamedTuple):
    row: int
    col: int


class Sub(NamedTuple):
    row: int
    col: int


class Reduce(NamedTuple):
    row: int


@dataclass(frozen=True, eq=False)
class KernelProgram:
    instructions: tuple
    ring: object
    acc: AccumulatorModel
    shape: tuple

    def __len__(self):
        return len(self.instructions)

    @property
    def nnz(self):
        return sum(1 for ins in self.instructions if not isinstance(ins, Reduce))

    def row_segments(self):
        """(row, first, last+1) instruction ranges, one per output row."""
        segs = []
        start = 0
        ins = self.instructions
        for k in range(1, len(ins) + 1):
            if k == len(ins) or ins[k].row != ins[start].row:
                segs.append((ins[start].row, start, k))
                start = k
        return segs


def compile_matrix(a, acc=AccumulatorModel.NARROW_FLOAT):
    """Straight-line program computing y <- A x + y for this one matrix."""
    a = to_csr(a)
    ring = a.ring
    wmul = mul_window(ring, acc)
    wadd = add_window(ring, acc)
    m = ring.modulus
    out = []
    for i in range(a.nrows):
        k0, k1 = int(a.start[i]), int(a.start[i + 1])
        if k0 == k1:
            continue
        count, has_mul = 0, False
        for k in range(k0, k1):
            c = int(a.data[k]) % m
            j = int(a.colid[k])
            if c == 1:
                ins = Add(i, j)
            elif c == m - 1:
                ins = Sub(i, j)
            else:
                ins = AddMul(i, int(a.data[k]), j)
            mul = has_mul or isinstance(ins, AddMul)
            if count + 1 > (wmul if mul else wadd):
                out.append(Reduce(i))
                count, mul = 0, isinstance(ins, AddMul)
            out.append(ins)
            count += 1
            has_mul = mul
        out.append(Reduce(i))
    return KernelProgram(tuple(out), ring, acc, a.shape)


def check_windows(p):
    """True when no accumulation window of the program exceeds its budget."""
    wmul = mul_window(p.ring, p.acc)
    wadd = add_window(p.ring, p.acc)
    count, has_mul, row = 0, False, None
    for ins in p.instructions:
        if ins.row != row:
            if count:
                return False  # a row ended without Reduce
            row = ins.row
        if isinstance(ins, Reduce):
            count, has_mul = 0, False
            continue
        count += 1
        has_mul = has_mul or isinstance(ins, AddMul)
        if count > (wmul if has_mul else wadd):
            return False
    return count == 0


def _execute(instructions, y, x, ring, dtype):
    m = dtype.type(ring.modulus)
    hi = dtype.type(ring.hi)
    balanced = ring.balanced
    for ins in instructions:
        if isinstance(ins, AddMul):
            y[ins.row] = y[ins.row] + dtype.type(ins.coef) * x[ins.col]
        elif isinstance(ins, Add):
            y[ins.row] = y[ins.row] + x[ins.col]
        elif isinstance(ins, Sub):
            y[ins.row] = y[ins.row] - x[ins.col]
        else:
            r = y[ins.row] % m
            if balanced and r > hi:
                r = r - m
            y[ins.row] = r


def run(p, y, x, workers=1):
    """Interpret the program in its carrier type; returns the new y."""
    y = np.asarray(y, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (p.shape[1],) or y.shape != (p.shape[0],):
        raise DimensionMismatch(f"program for {p.shape} applied to x{x.shape}, y{y.shape}")
    dtype = p.acc.dtype
    yc = y.astype(dtype)
    xc = x.astype(dtype)
    segs = p.row_segments()
    if workers <= 1 or len(segs) < 2:
        _execute(p.instructions, yc, xc, p.ring, dtype)
    else:
        bounds = _parallel.even_blocks(len(segs), workers)
        parts = [p.instructions[segs[a][1]:segs[b - 1][2]] for a, b in bounds]
        _parallel.run(lambda part: _execute(part, yc, xc, p.ring, dtype), parts, workers)
    return yc.astype(np.int64)


_ELEM = {AccumulatorModel.NARROW_FLOAT: "float",
         AccumulatorModel.WIDE_FLOAT: "double",
         AccumulatorModel.WIDE_INT: "long long"}


def preamble(p):
    m = p.ring.modulus
    lines = [f"typedef {_ELEM[p.acc]} elem;"]
    if p.acc is AccumulatorModel.WIDE_INT:
        lines.append(f"#define MODR(v) (((v) % {m} + {m}) % {m})")
    else:
        lines.insert(0, "#include <math.h>")
        lines.append(f"#define MODR(v) (fmod(fmod((v), {m}) + {m}, {m}))")
    if p.ring.balanced:
        lines.append(f"#define REDUCE(v) (MODR(v) > {p.ring.hi} ? MODR(v) - {m} : MODR(v))")
    else:
        lines.append("#define REDUCE(v) MODR(v)")
    return "\n".join(lines) + "\n"


def _statement(ins):
    if isinstance(ins, AddMul):
        return f"   y[{ins.row}] += {ins.coef}*x[{ins.col}];"
    if isinstance(ins, Add):
        return f"   y[{ins.row}] += x[{ins.col}];"
    if isinstance(ins, Sub):
        return f"   y[{ins.row}] -= x[{ins.col}];"
    return f"   y[{ins.row}] = REDUCE(y[{ins.row}]);"


def emit_source(p, unit_size=1000):
    """C source text: one unit per ``unit_size`` matrix entries, then the driver unit."""
    if unit_size < 1:
        raise ValueError("unit_size must be >= 1")
    head = preamble(p)
    units, body, count = [], [], 0

    def flush():
        k = len(units)
        units.append(head + f"\nvoid spmv_unit{k}(elem *y, const elem *x) {{\n"
                     + "\n".join(body) + "\n}\n")

    for ins in p.instructions:
        if not isinstance(ins, Reduce):
            if count == unit_size:
                flush()
                body, count = [], 0
            count += 1
        body.append(_statement(ins))
    if body:
        flush()
    protos = "".join(f"void spmv_unit{k}(elem *y, const elem *x);\n" for k in range(len(units)))
    calls = "".join(f"   spmv_unit{k}(y, x);\n" for k in range(len(units)))
    driver = head + "\n" + protos + "\nvoid spmv(elem *y, const elem *x) {\n" + calls + "}\n"
    return units + [driver]
