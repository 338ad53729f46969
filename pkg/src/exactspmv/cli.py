"""
Command-line driver.

    exactspmv info    MATRIX [--modulus P] [--carrier C]
    exactspmv convert MATRIX OUTPUT [--to sms|mm]
    exactspmv bench   MATRIX [--format F[,F...]] [--iters N] [--block-size K] [--plan FILE]
    exactspmv seq     MATRIX --length L [--block-size S] [--output FILE]
    exactspmv rank    MATRIX [--modulus P] [--block-size S] [--seed N] [--degree-bound D]

Every command prints one JSON object with a ``schema`` field.  Exit codes:
0 success, 1 input or runtime error, 2 rank retries exhausted, 64 usage error.
"""

import argparse
import json
import sys
import time
from dataclasses import asdict

import numpy as np

from . import _parallel, blockseq, bwrank, hybrid, kernels, specialize
from .errors import ExactSpmvError, RetriesExhausted
from .fileio import read_matrix, write_matrix
from .matstore import convert
from .modring import AccumulatorModel, Representation, RingSpec

EXIT_OK, EXIT_ERROR, EXIT_RETRIES, EXIT_USAGE = 0, 1, 2, 64
BENCH_FORMATS = ("coo", "csr", "ell", "ellr", "coos", "hybrid", "auto", "jit")
DEFAULT_BENCH = ("coo", "csr", "ellr", "coos", "auto")
ELL_MAX_FILL = 8  # skip ELL when width * nrows exceeds this many times nnz


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _schema(cmd):
    return f"exactspmv.{cmd}/1"


def _threads(args):
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.threads
    return _parallel.default_workers()


def _ring(args):
    if args.modulus < 2:
        raise UsageError(f"modulus must be >= 2, got {args.modulus}")
    rep = Representation.BALANCED if getattr(args, "balanced", False) else Representation.UNSIGNED
    return RingSpec(args.modulus, rep)


def _carrier(args):
    try:
        return AccumulatorModel.parse(args.carrier)
    except KeyError:
        raise UsageError(f"unknown carrier {args.carrier!r}") from None


def _load(args):
    mf = read_matrix(args.matrix, args.input_format)
    return mf, mf.matrix(_ring(args))


def cmd_info(args):
    mf, a = _load(args)
    stats = hybrid.analyze(a)
    plan = hybrid.choose_plan(stats, a.ring, _carrier(args))
    return {"schema": _schema("info"), "matrix": args.matrix, "file_format": mf.format,
            "modulus": a.ring.modulus, "file_entries": mf.nbnz, "stats": stats.as_dict(),
            "plan": asdict(plan)}


def cmd_convert(args):
    mf, a = _load(args)
    fmt = write_matrix(args.output, a, args.to)
    return {"schema": _schema("convert"), "input": args.matrix, "output": args.output,
            "format": fmt, "rows": a.nrows, "cols": a.ncols, "nnz": a.nnz}


def _bench_operand(a, fmt, plan, acc):
    """(operand, None) for one format, or (None, reason) when it is skipped."""
    if fmt in ("coo", "csr", "coos", "ellr", "ell"):
        m = convert(a, fmt)
        if m.nrows and fmt in ("ell", "ellr") and m.width * m.nrows > ELL_MAX_FILL * max(a.nnz, 1):
            return None, "padding too large"
        return m, None
    if fmt in ("hybrid", "auto"):
        return hybrid.build_hybrid(a, plan), None
    return specialize.compile_matrix(a, acc), None


def _multiply(op, y, x, acc, workers):
    if isinstance(op, specialize.KernelProgram):
        if x.ndim == 1:
            return specialize.run(op, y, x, workers)
        return np.stack([specialize.run(op, y[:, j], x[:, j], workers)
                         for j in range(x.shape[1])], axis=1)
    if isinstance(op, hybrid.HybridMatrix):
        return hybrid.hybrid_spmv(y, op, x, acc, workers)
    if x.ndim == 1:
        return kernels.spmv(y, op, x, acc, workers)
    return kernels.spmm(y, op, x, acc=acc, workers=workers)


def cmd_bench(args):
    mf, a = _load(args)
    acc = _carrier(args)
    workers = _threads(args)
    formats = [f.strip().lower() for f in args.format.split(",")] if args.format else list(DEFAULT_BENCH)
    for f in formats:
        if f not in BENCH_FORMATS:
            raise UsageError(f"unknown format {f!r}; choose from {', '.join(BENCH_FORMATS)}")
    if args.iters < 1 or args.block_size < 1:
        raise UsageError("--iters and --block-size must be >= 1")
    chosen = hybrid.choose_plan(hybrid.analyze(a), a.ring, acc)
    given = None
    if args.plan:
        with open(args.plan, encoding="ascii") as fh:
            given = hybrid.SplitPlan.from_text(fh.read())
    rng = np.random.default_rng(args.seed)
    shape = (a.ncols,) if args.block_size == 1 else (a.ncols, args.block_size)
    x = a.ring.random(rng, shape)
    y0 = np.zeros((a.nrows,) + shape[1:], dtype=np.int64)
    ref = _multiply(a, y0, x, acc, workers)

    ops, results = [], []
    for f in formats:
        plan = given if (f == "hybrid" and given is not None) else chosen
        op, skipped = _bench_operand(a, f, plan, acc)
        if op is None:
            results.append({"format": f, "skipped": skipped})
            continue
        y = _multiply(op, y0, x, acc, workers)
        if not np.array_equal(y, ref):
            raise ExactSpmvError(f"format {f} disagrees with the CSR reference; no timings reported")
        ops.append((f, op))
    checksum = int(a.ring.to_unsigned(ref).sum() % a.ring.modulus)
    nvec = 1 if x.ndim == 1 else x.shape[1]
    for f, op in ops:
        y = y0
        t0 = time.perf_counter()
        for _ in range(args.iters):
            y = _multiply(op, y, x, acc, workers)
        dt = time.perf_counter() - t0
        results.append({"format": f, "seconds": dt,
                        "mflops": 2.0 * a.nnz * nvec * args.iters / dt / 1e6 if dt > 0 else None,
                        "checksum": checksum})
    return {"schema": _schema("bench"), "matrix": args.matrix, "rows": a.nrows,
            "cols": a.ncols, "nnz": a.nnz, "modulus": a.ring.modulus,
            "representation": a.ring.representation.value, "carrier": acc.name.lower(),
            "threads": workers, "iters": args.iters, "block_size": nvec, "seed": args.seed,
            "plan": asdict(chosen), "results": results}


def cmd_seq(args):
    mf, a = _load(args)
    acc = _carrier(args)
    workers = _threads(args)
    if args.length < 1:
        raise UsageError("--length must be >= 1")
    p = a.ring.modulus
    n = a.nrows
    if args.block_size:
        Y = blockseq.random_block(n, args.block_size, p, args.seed)
        seq = blockseq.block_sequence(a, Y, args.length, acc, workers)
        kind, terms = "block", [t.tolist() for t in seq.terms]
    else:
        x = np.random.default_rng(args.seed).integers(0, p, size=n, dtype=np.int64)
        kind = "krylov"
        terms = [a.ring.to_unsigned(t).tolist()
                 for t in blockseq.krylov_sequence(a, x, args.length, acc, workers)]
    doc = {"schema": _schema("seq"), "matrix": args.matrix, "kind": kind, "modulus": p,
           "length": args.length, "block_size": args.block_size or 1, "seed": args.seed}
    if args.output:
        with open(args.output, "w", encoding="ascii") as fh:
            json.dump(dict(doc, terms=terms), fh)
        doc["output"] = args.output
    else:
        doc["terms"] = terms
    return doc


def cmd_rank(args):
    mf, a = _load(args)
    workers = _threads(args)
    n = min(a.shape)
    s = min(args.block_size, n) if n else args.block_size
    rep = bwrank.block_rank(a, a.ring.modulus, s, args.seed, args.degree_bound, _carrier(args),
                            workers, confirmations=args.confirmations)
    d = rep.as_dict()
    d["matrix"] = args.matrix
    d["threads"] = workers
    return d


def build_parser():
    parser = _Parser(prog="exactspmv", description="Exact sparse matrix products over Z/mZ.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, carrier=True):
        p.add_argument("matrix", help="SMS or MatrixMarket file")
        p.add_argument("--modulus", type=int, default=65521)
        p.add_argument("--input-format", choices=("sms", "mm"), default=None)
        p.add_argument("--balanced", action="store_true", help="balanced representation")
        p.add_argument("--threads", type=int, default=None)
        if carrier:
            p.add_argument("--carrier", default="wide-float",
                           help="narrow-float, wide-float or wide-int")

    p = sub.add_parser("info", help="row statistics and recommended plan")
    common(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("convert", help="rewrite as SMS or MatrixMarket")
    common(p, carrier=False)
    p.add_argument("output")
    p.add_argument("--to", choices=("sms", "mm"), default=None)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("bench", help="time SpMV in several formats")
    common(p)
    p.add_argument("--format", default=None, help="comma list of " + "|".join(BENCH_FORMATS))
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--block-size", type=int, default=1)
    p.add_argument("--plan", default=None, help="key=value plan file for the hybrid format")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("seq", help="Krylov or projected block sequence")
    common(p)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--block-size", type=int, default=0, help="0 for the Krylov sequence")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_seq)

    p = sub.add_parser("rank", help="Monte Carlo rank by block Wiedemann")
    common(p)
    p.add_argument("--block-size", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degree-bound", type=int, default=None)
    p.add_argument("--confirmations", type=int, default=2)
    p.set_defaults(func=cmd_rank)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        doc = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except RetriesExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RETRIES
    except (ExactSpmvError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    json.dump(doc, out, indent=2, default=_jsonable)
    out.write("\n")
    return EXIT_OK


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


if __name__ == "__main__":
    sys.exit(main())
