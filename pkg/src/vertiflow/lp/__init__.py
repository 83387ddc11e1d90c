"""Generic LP/MIP representation and the bundled reference solvers.

The simplex and branch & bound here are deliberately simple, deterministic,
and self-contained so the whole package runs without an external MILP engine.
Any callable with the :data:`~vertiflow.lp.branch_bound.LpEngine` signature
can be plugged in instead (see :mod:`vertiflow.lp.scipy_engine`).
"""

from .model import (
    EQ,
    GE,
    INFEASIBLE,
    LE,
    NODE_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LpModel,
    LpSolution,
    MipModel,
    SolverConfig,
)
from .branch_bound import solve_mip
from .simplex import solve_lp
from .textfmt import format_lp_text, format_mip_text

__all__ = [
    "EQ",
    "GE",
    "LE",
    "INFEASIBLE",
    "NODE_LIMIT",
    "OPTIMAL",
    "UNBOUNDED",
    "LpModel",
    "LpSolution",
    "MipModel",
    "SolverConfig",
    "solve_lp",
    "solve_mip",
    "format_lp_text",
    "format_mip_text",
]
