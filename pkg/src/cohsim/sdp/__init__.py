"""Small dense SDP layer: problem builder, complex embedding, interior-point solver."""

from .embed import embed_complex
from .ipm import DEFAULT_TOL, SdpSolution, SolverError, solve
from .problem import (
    Block,
    LinFunc,
    MatExpr,
    ScalarExpr,
    SdpProblem,
    dump_problem,
    load_problem,
    problem_from_json,
    problem_to_json,
)

__all__ = [
    "Block",
    "LinFunc",
    "MatExpr",
    "ScalarExpr",
    "SdpProblem",
    "SdpSolution",
    "SolverError",
    "solve",
    "embed_complex",
    "DEFAULT_TOL",
    "problem_to_json",
    "problem_from_json",
    "dump_problem",
    "load_problem",
]
