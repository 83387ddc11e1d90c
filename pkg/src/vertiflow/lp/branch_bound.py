"""Best-first branch & bound for LPs with binary variables.

Node selection is best-first on the LP relaxation bound with ties broken by
node creation order; branching picks the most fractional binary with ties
broken by lowest variable index.  A new incumbent must beat the old one by a
strict margin to be accepted, so re-solving the same model always reproduces
the same solution.
"""

from __future__ import annotations

import heapq
import math
from typing import Callable, Optional

import numpy as np

from ..errors import SolverError
from .model import (
    INFEASIBLE,
    NODE_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LpModel,
    LpSolution,
    MipModel,
    SolverConfig,
)
from .simplex import solve_lp

LpEngine = Callable[[LpModel, SolverConfig], LpSolution]


def _clone_with_bounds(lp: LpModel, lower: list[float], upper: list[float]) -> LpModel:
    clone = LpModel()
    clone.obj = lp.obj
    clone.names = lp.names
    clone.rows = lp.rows
    clone.relations = lp.relations
    clone.rhs = lp.rhs
    clone.row_names = lp.row_names
    clone.lower = lower
    clone.upper = upper
    return clone


def solve_mip(
    model: MipModel,
    config: Optional[SolverConfig] = None,
    lp_engine: LpEngine = solve_lp,
) -> LpSolution:
    """Solve a maximization MIP with binary variables by branch & bound.

    Returns an :class:`LpSolution` whose binary entries are exact 0/1 floats.
    If the node limit is exceeded the best incumbent is returned with status
    ``node_limit`` and ``bound`` giving the remaining optimistic bound.
    """
    cfg = config or SolverConfig()
    lp = model.lp
    binaries = sorted(model.binaries)

    root_lower = list(lp.lower)
    root_upper = list(lp.upper)
    for j in binaries:
        root_lower[j] = max(root_lower[j], 0.0)
        root_upper[j] = min(root_upper[j], 1.0)

    incumbent: Optional[LpSolution] = None
    incumbent_obj = -math.inf
    best_bound = math.inf
    nodes_explored = 0
    counter = 0

    root = lp_engine(_clone_with_bounds(lp, root_lower, root_upper), cfg)
    nodes_explored += 1
    if root.status == INFEASIBLE:
        return LpSolution(INFEASIBLE, root.x, root.dual, root.reduced_costs,
                          math.nan, math.nan, nodes=nodes_explored)
    if root.status == UNBOUNDED:
        raise SolverError("LP relaxation unbounded; MIP model violates preconditions")

    # heap entries: (-bound, creation_order, lower, upper, solution)
    heap: list[tuple[float, int, list[float], list[float], LpSolution]] = []
    heapq.heappush(heap, (-root.objective, counter, root_lower, root_upper, root))

    while heap:
        neg_bound, _, lower, upper, sol = heapq.heappop(heap)
        bound = -neg_bound
        if bound <= incumbent_obj + cfg.incumbent_tol:
            continue
        if nodes_explored > cfg.node_limit:
            best_bound = bound
            result_status = NODE_LIMIT
            break

        # most fractional: maximize min(x, 1-x); ties -> lowest index
        frac_j = -1
        frac_dist = -1.0
        for j in binaries:
            v = sol.x[j]
            dist = min(v, 1.0 - v)
            if dist > cfg.integrality_tol and dist > frac_dist + 1e-15:
                frac_dist = dist
                frac_j = j

        if frac_j < 0:
            # integral: candidate incumbent
            if sol.objective > incumbent_obj + cfg.incumbent_tol:
                incumbent_obj = sol.objective
                incumbent = sol
            continue

        for fix in (0.0, 1.0):
            child_lower = list(lower)
            child_upper = list(upper)
            if fix == 0.0:
                child_upper[frac_j] = 0.0
            else:
                child_lower[frac_j] = 1.0
            child = lp_engine(_clone_with_bounds(lp, child_lower, child_upper), cfg)
            nodes_explored += 1
            if child.status == INFEASIBLE:
                continue
            if child.status == UNBOUNDED:
                raise SolverError("LP relaxation unbounded below the root; inconsistent model")
            if child.objective <= incumbent_obj + cfg.incumbent_tol:
                continue
            counter += 1
            heapq.heappush(heap, (-child.objective, counter, child_lower, child_upper, child))
    else:
        result_status = OPTIMAL if incumbent is not None else INFEASIBLE

    if incumbent is None:
        status = NODE_LIMIT if result_status == NODE_LIMIT else INFEASIBLE
        return LpSolution(status, np.zeros(lp.n_vars), np.zeros(lp.n_rows),
                          np.zeros(lp.n_vars), math.nan, math.nan, nodes=nodes_explored)

    x = incumbent.x.copy()
    for j in binaries:
        x[j] = float(round(x[j]))
    return LpSolution(
        status=result_status,
        x=x,
        dual=incumbent.dual,
        reduced_costs=incumbent.reduced_costs,
        objective=incumbent.objective,
        dual_objective=incumbent.dual_objective,
        iterations=incumbent.iterations,
        bound=best_bound if result_status == NODE_LIMIT else incumbent.objective,
        nodes=nodes_explored,
    )
