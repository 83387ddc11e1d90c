"""Optional LP engine backed by scipy's HiGHS interface.

Drop-in replacement for :func:`vertiflow.lp.simplex.solve_lp` where scipy is
available; used in the test suite as an independent cross-check.  The bundled
simplex stays the default so the package works without scipy installed.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .model import (
    EQ,
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    UNBOUNDED,
    LpModel,
    LpSolution,
    SolverConfig,
)


def solve_lp_scipy(model: LpModel, config: Optional[SolverConfig] = None) -> LpSolution:
    from scipy.optimize import linprog

    n = model.n_vars
    A_ub, b_ub, ub_rows = [], [], []
    A_eq, b_eq, eq_rows = [], [], []
    dense = model.dense_matrix()
    for i, rel in enumerate(model.relations):
        if rel == EQ:
            A_eq.append(dense[i])
            b_eq.append(model.rhs[i])
            eq_rows.append(i)
        elif rel == LE:
            A_ub.append(dense[i])
            b_ub.append(model.rhs[i])
            ub_rows.append(i)
        else:
            A_ub.append(-dense[i])
            b_ub.append(-model.rhs[i])
            ub_rows.append(i)

    res = linprog(
        c=-np.asarray(model.obj),
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=[(lo if math.isfinite(lo) else None, hi if math.isfinite(hi) else None)
                for lo, hi in zip(model.lower, model.upper)],
        method="highs",
    )
    if res.status == 2:
        return LpSolution(INFEASIBLE, np.zeros(n), np.zeros(model.n_rows),
                          np.zeros(n), math.nan, math.nan)
    if res.status == 3:
        return LpSolution(UNBOUNDED, np.zeros(n), np.zeros(model.n_rows),
                          np.zeros(n), math.inf, math.inf)
    if res.status != 0:
        raise RuntimeError(f"scipy linprog failed: {res.message}")

    dual = np.zeros(model.n_rows)
    if eq_rows:
        dual[eq_rows] = -res.eqlin.marginals
    pos = 0
    for i, rel in zip(ub_rows, (r for r in model.relations if r != EQ)):
        marg = -res.ineqlin.marginals[pos]
        dual[i] = marg if rel == LE else -marg
        pos += 1
    objective = float(-res.fun)
    reduced = np.zeros(n)
    if hasattr(res, "lower"):
        reduced = np.asarray(res.lower.marginals) + np.asarray(res.upper.marginals)
        reduced = -reduced
    return LpSolution(OPTIMAL, np.asarray(res.x), dual, reduced, objective, objective,
                      iterations=int(getattr(res, "nit", 0)))
