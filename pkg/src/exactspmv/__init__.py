"""Exact sparse matrix-vector products over Z/mZ and block Wiedemann rank."""

from .blockseq import ProjSequence, block_sequence, krylov_sequence, pow_apply
from .bwrank import RankReport, block_rank, det_codegree, det_degree, precondition
from .errors import *  # noqa: F401,F403
from .fileio import MatrixFile, read_matrix, read_matrix_market, read_sms, write_matrix
from .hybrid import (ChooserConfig, HybridMatrix, Preferences, SplitPlan, analyze,
                     build_hybrid, choose_plan, hybrid_spmv)
from .kernels import apply, spmm, spmv, spmv_general, spmv_pattern, spmv_transpose
from .matstore import (CooMatrix, CoosMatrix, CsrMatrix, EllMatrix, EllRMatrix,
                       PatternMatrix, Triplets, build_coo, build_csr, convert, from_dense,
                       to_csr, transpose)
from .modring import AccumulatorModel, Representation, RingSpec, budget_add, budget_mul
from .orderbasis import (GeneratorResult, OrderBasis, SeriesApprox, mbasis,
                         min_matrix_generator, pmbasis)
from .polymat import PolyMat, RootOfUnity, det_scalar, find_root, interpolate, pm_eval, pm_mul
from .specialize import KernelProgram, compile_matrix, emit_source

__version__ = "0.1.0"
