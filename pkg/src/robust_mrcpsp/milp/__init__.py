from .backends import (
    ERROR,
    FEASIBLE,
    NO_SOLUTION,
    OPTIMAL,
    LIGHT_HEURISTICS,
    BackendUnavailable,
    BranchAndBoundBackend,
    HighsBackend,
    SolveOutcome,
    SolverBackend,
    default_backend,
    make_backend,
    solve,
)
from .lp_format import write_lp
from .model import EQ, GE, INF, LE, MAXIMIZE, MINIMIZE, Constraint, MipModel, ModelError, Variable
from .simplex import INFEASIBLE, UNBOUNDED

__all__ = [
    "ERROR",
    "FEASIBLE",
    "INFEASIBLE",
    "NO_SOLUTION",
    "OPTIMAL",
    "LIGHT_HEURISTICS",
    "UNBOUNDED",
    "EQ",
    "GE",
    "INF",
    "LE",
    "MAXIMIZE",
    "MINIMIZE",
    "BackendUnavailable",
    "BranchAndBoundBackend",
    "Constraint",
    "HighsBackend",
    "MipModel",
    "ModelError",
    "SolveOutcome",
    "SolverBackend",
    "Variable",
    "default_backend",
    "make_backend",
    "solve",
    "write_lp",
]
