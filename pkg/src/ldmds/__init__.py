"""Lowest-density vertical MDS array codes over prime fields.

Each of ``n`` nodes stores ``m`` data and ``p`` parity symbols in one column
of an ``(m+p) x n`` array; any ``r = n - k`` lost columns can be rebuilt.
"""

from .codec import (CodewordArray, DataBlock, ErasurePattern, decode, decode_rowwise, encode,
                    encode_rowwise)
from .construct import (ArrayLayout, CodeParams, GeneratorA, build_generator, build_layout,
                        cauchy_totally_nonsingular, code_from_dict, code_to_dict, derive_params,
                        design_code, dual_code, extend_code, load_code)
from .errors import (ArrayCodeError, DecodeError, SingularMatrix, TooManyErasures, TopologyViolation,
                     Unrecoverable)
from .field import Matrix, PrimeField
from .graph import (Graph, GraphCodePlan, analyze_graph, find_plan, graph_admits_no_ld_mds,
                    plan_divisible_code, plan_r2_code, support_graph)
from .netsim import NetworkConfig, SimReport, simulate
from .verify import VerificationReport, check_mds_exhaustive, structurally_singular, verify_code

__version__ = "0.1.0"
