"""
Real conic programming kernel and complex Hermitian embedding layer.
"""

from src.solver.conic import (
    ConicBackend,
    ConicProblem,
    ConicSolution,
    ConicStatus,
    InteriorPointBackend,
    Tolerances,
    dump_problem,
    parse_problem,
    solve,
    write_problem,
)
from src.solver.embedding import hermitian_embed, hermitian_unembed, rank_one_extract

__all__ = [
    "ConicBackend",
    "ConicProblem",
    "ConicSolution",
    "ConicStatus",
    "InteriorPointBackend",
    "Tolerances",
    "dump_problem",
    "parse_problem",
    "solve",
    "write_problem",
    "hermitian_embed",
    "hermitian_unembed",
    "rank_one_extract",
]
