"""Linear / mixed-integer model containers and solver configuration.

Models are built row by row with sparse coefficient lists and solved by the
bundled simplex (:mod:`vertiflow.lp.simplex`) or any engine implementing the
same call signature.  The objective sense is always maximize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import ValidationError

LE, EQ, GE = "<=", "==", ">="
_RELATIONS = (LE, EQ, GE)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NODE_LIMIT = "node_limit"


@dataclass
class SolverConfig:
    """Numerical tolerances and limits; defaults suit double precision."""

    feas_tol: float = 1e-7
    opt_tol: float = 1e-6
    pivot_tol: float = 1e-9
    iteration_limit: int = 200_000
    refactor_every: int = 400
    # branch & bound
    integrality_tol: float = 1e-6
    incumbent_tol: float = 1e-9
    node_limit: int = 200_000


class LpModel:
    """A maximization LP: rows with <=/==/>= relations plus variable bounds."""

    def __init__(self) -> None:
        self.obj: list[float] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self.names: list[str] = []
        self.rows: list[list[tuple[int, float]]] = []
        self.relations: list[str] = []
        self.rhs: list[float] = []
        self.row_names: list[str] = []

    @property
    def n_vars(self) -> int:
        return len(self.obj)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_var(
        self,
        obj: float = 0.0,
        lower: float = 0.0,
        upper: float = math.inf,
        name: str = "",
    ) -> int:
        if lower > upper:
            raise ValidationError(f"variable {name or len(self.obj)}: lower {lower} > upper {upper}")
        self.obj.append(float(obj))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.names.append(name or f"x{len(self.obj) - 1}")
        return len(self.obj) - 1

    def add_vars(self, count: int, obj: float = 0.0, lower: float = 0.0,
                 upper: float = math.inf, prefix: str = "x") -> list[int]:
        return [self.add_var(obj, lower, upper, f"{prefix}{i}") for i in range(count)]

    def add_row(
        self,
        coeffs: Sequence[tuple[int, float]],
        relation: str,
        rhs: float,
        name: str = "",
    ) -> int:
        if relation not in _RELATIONS:
            raise ValidationError(f"unknown relation {relation!r}")
        if not math.isfinite(rhs):
            raise ValidationError(f"row {name or len(self.rows)}: non-finite rhs {rhs}")
        merged: dict[int, float] = {}
        for j, a in coeffs:
            if not (0 <= j < self.n_vars):
                raise ValidationError(f"row {name or len(self.rows)}: unknown variable index {j}")
            merged[j] = merged.get(j, 0.0) + float(a)
        self.rows.append(sorted(merged.items()))
        self.relations.append(relation)
        self.rhs.append(float(rhs))
        self.row_names.append(name or f"r{len(self.rows) - 1}")
        return len(self.rows) - 1

    def dense_matrix(self) -> np.ndarray:
        A = np.zeros((self.n_rows, self.n_vars), dtype=float)
        for i, row in enumerate(self.rows):
            for j, a in row:
                A[i, j] = a
        return A

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        act = np.zeros(self.n_rows)
        for i, row in enumerate(self.rows):
            act[i] = sum(a * x[j] for j, a in row)
        return act


@dataclass
class LpSolution:
    """Result of an LP solve; duals are one per constraint row.

    ``dual`` follows the max-sense shadow-price convention: the dual of a row
    is the derivative of the optimal objective with respect to its right-hand
    side, so <= rows have nonnegative duals and >= rows nonpositive ones.
    """

    status: str
    x: np.ndarray
    dual: np.ndarray
    reduced_costs: np.ndarray
    objective: float
    dual_objective: float
    iterations: int = 0
    # populated by branch & bound only
    bound: Optional[float] = None
    nodes: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class MipModel:
    """An LpModel plus a set of variable indices constrained binary."""

    lp: LpModel
    binaries: frozenset[int]

    def __post_init__(self) -> None:
        for j in self.binaries:
            if not (0 <= j < self.lp.n_vars):
                raise ValidationError(f"binary index {j} out of variable range")
