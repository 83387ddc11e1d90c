"""Dense bounded-variable revised simplex with dual extraction.

Two-phase primal simplex over the equality form ``A x + s = b`` where each
row gets one slack variable whose bounds encode the relation (``<=`` gives
``s >= 0``, ``>=`` gives ``s <= 0``, ``==`` fixes ``s = 0``).  Free variables
and one- or two-sided bounds are handled directly, which the throughput and
design models need (nonpositive demand blocks, free dual blocks, binaries
relaxed to [0, 1]).

The start basis is a crash basis: rows whose slack value is already within
its bounds start with that slack basic, and only violated rows receive an
artificial column, so phase 1 touches a fraction of the rows.  Artificials
and fixed variables are excluded from pricing altogether.

Pivot selection is Dantzig's rule with lowest-index tie-breaking; Bland's
rule takes over after a run of ``2 * (rows + cols)`` degenerate pivots and is
released again on the next improving step, which keeps the method anti-cycling
while staying deterministic.  The basis inverse is kept explicitly with
product-form updates and periodic refactorization.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..errors import SimplexStalledError, SolverError
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

_AT_LOWER = 0
_AT_UPPER = 1
_FREE = 2
_BASIC = 3

_DEGEN_TOL = 1e-11
_TIE_TOL = 1e-12

try:  # in-place rank-1 update; numpy fallback allocates a temporary
    from scipy.linalg.blas import dger as _dger
except ImportError:  # pragma: no cover
    _dger = None

# The pivot loop issues thousands of small BLAS calls; letting the BLAS spin
# up its full thread pool for each one is catastrophically slow on small
# machines, so solves run with BLAS parallelism disabled.
try:
    from threadpoolctl import threadpool_limits as _threadpool_limits
except ImportError:  # pragma: no cover
    import contextlib

    def _threadpool_limits(limits=None):
        return contextlib.nullcontext()


def solve_lp(model: LpModel, config: Optional[SolverConfig] = None) -> LpSolution:
    """Solve a maximization LP; returns primal values, row duals, reduced costs.

    Raises :class:`SimplexStalledError` if the iteration limit is hit; the
    solver never returns an unverified answer.
    """
    cfg = config or SolverConfig()
    if model.n_rows == 0:
        return _solve_unconstrained(model)
    with _threadpool_limits(limits=1):
        return _BoundedSimplex(model, cfg).run()


def _solve_unconstrained(model: LpModel) -> LpSolution:
    # No rows: each variable independently goes to whichever bound its
    # objective sign prefers.
    n = model.n_vars
    x = np.zeros(n)
    for j in range(n):
        c, lo, hi = model.obj[j], model.lower[j], model.upper[j]
        if c > 0:
            if math.isinf(hi):
                return LpSolution(UNBOUNDED, x, np.zeros(0), np.zeros(n), math.inf, math.inf)
            x[j] = hi
        elif c < 0:
            if math.isinf(lo):
                return LpSolution(UNBOUNDED, x, np.zeros(0), np.zeros(n), math.inf, math.inf)
            x[j] = lo
        else:
            x[j] = lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0.0)
    obj = float(np.dot(model.obj, x))
    d = np.array(model.obj, dtype=float)
    return LpSolution(OPTIMAL, x, np.zeros(0), d, obj, obj)


class _BoundedSimplex:
    def __init__(self, model: LpModel, cfg: SolverConfig) -> None:
        self.cfg = cfg
        self.m = model.n_rows
        self.n_struct = model.n_vars
        m, n = self.m, self.n_struct
        self.art0 = n + m

        lower = np.full(n + m, -math.inf)
        upper = np.full(n + m, math.inf)
        lower[:n] = model.lower
        upper[:n] = model.upper
        for i, rel in enumerate(model.relations):
            j = n + i
            if rel == LE:
                lower[j], upper[j] = 0.0, math.inf
            elif rel == GE:
                lower[j], upper[j] = -math.inf, 0.0
            else:
                lower[j], upper[j] = 0.0, 0.0

        x = np.zeros(n + m)
        status = np.full(n + m, _AT_LOWER, dtype=np.int8)
        for j in range(n + m):
            if math.isfinite(lower[j]):
                x[j], status[j] = lower[j], _AT_LOWER
            elif math.isfinite(upper[j]):
                x[j], status[j] = upper[j], _AT_UPPER
            else:
                x[j], status[j] = 0.0, _FREE

        A_struct = model.dense_matrix()
        self.b = np.array(model.rhs, dtype=float)
        resid = self.b - A_struct @ x[:n] - x[n:n + m]

        # crash basis: slack where its bounds admit the residual, else artificial
        basis = np.empty(m, dtype=np.int64)
        diag = np.ones(m)
        art_rows: list[int] = []
        for i in range(m):
            s = n + i
            v = x[s] + resid[i]
            if lower[s] <= v <= upper[s]:
                basis[i] = s
                x[s] = v
                status[s] = _BASIC
            else:
                art_rows.append(i)
        n_art = len(art_rows)
        A = np.zeros((m, n + m + n_art), dtype=float)
        A[:, :n] = A_struct
        A[np.arange(m), n + np.arange(m)] = 1.0
        self.lower = np.concatenate([lower, np.zeros(n_art)])
        self.upper = np.concatenate([upper, np.full(n_art, math.inf)])
        self.x = np.concatenate([x, np.zeros(n_art)])
        self.status = np.concatenate([status, np.full(n_art, _BASIC, dtype=np.int8)])
        for t, i in enumerate(art_rows):
            j = self.art0 + t
            A[i, j] = 1.0 if resid[i] >= 0 else -1.0
            self.x[j] = abs(resid[i])
            basis[i] = j
            diag[i] = A[i, j]
        self.A = A
        self.basis = basis
        self.basis_inv = np.diag(diag)  # slack/artificial start basis is diag(+-1)
        self.n_art = n_art

        # columns eligible to enter: structural/slack, not fixed
        enterable = [j for j in range(n + m) if self.lower[j] < self.upper[j]]
        self.enter_idx = np.array(enterable, dtype=np.int64)
        self.A_enter_T = np.ascontiguousarray(A[:, self.enter_idx].T)
        # partial pricing: rotate through column segments, scan all before optimal
        self.seg_size = max(512, len(enterable) // 8 + 1)
        self.seg_start = 0
        # sparse column view of A for cheap FTRAN of the entering column
        self.cols = []
        for j in range(A.shape[1]):
            rows = np.nonzero(A[:, j])[0]
            self.cols.append((rows, A[rows, j].copy()))

        self.c = np.zeros(n + m + n_art)
        self.obj_struct = np.zeros(n + m + n_art)
        self.obj_struct[:n] = model.obj
        self.iterations = 0
        self.pivots_since_refactor = 0
        self.degenerate_run = 0
        self.bland = False
        self.bland_trigger = 2 * (m + n + m + n_art)

    # -- basic linear algebra -------------------------------------------------

    def _refactor(self) -> None:
        B = self.A[:, self.basis]
        try:
            self.basis_inv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular basis during refactorization") from exc
        nb_x = self.x.copy()
        nb_x[self.basis] = 0.0
        self.x[self.basis] = self.basis_inv @ (self.b - self.A @ nb_x)
        self.y = self.c[self.basis] @ self.basis_inv
        self.pivots_since_refactor = 0

    # -- pivot selection ------------------------------------------------------

    def _price_segment(self, lo: int, hi: int) -> tuple[int, int, float] | None:
        tol = self.cfg.opt_tol
        idx = self.enter_idx[lo:hi]
        d = self.c[idx] - self.A_enter_T[lo:hi] @ self.y
        st = self.status[idx]
        nonbasic = st != _BASIC
        up = nonbasic & ((st == _AT_LOWER) | (st == _FREE)) & (d > tol)
        down = nonbasic & ((st == _AT_UPPER) | (st == _FREE)) & (d < -tol)
        if self.bland:
            hits = np.nonzero(up | down)[0]
            if hits.size == 0:
                return None
            k = int(hits[0])
        else:
            score = np.where(up, d, 0.0) + np.where(down, -d, 0.0)
            k = int(np.argmax(score))
            if score[k] <= tol:
                return None
        return int(idx[k]), (1 if up[k] else -1), float(d[k])

    def _choose_entering(self) -> tuple[int, int, float] | None:
        total = len(self.enter_idx)
        if total == 0:
            return None
        if self.bland:
            # anti-cycling demands a global lowest-index scan
            return self._price_segment(0, total)
        start = self.seg_start
        offset = 0
        while offset < total:
            lo = (start + offset) % total
            hi = min(lo + self.seg_size, total)
            pick = self._price_segment(lo, hi)
            if pick is not None:
                self.seg_start = lo
                return pick
            offset += hi - lo
        return None

    def _ratio_test(self, j: int, direction: int) -> tuple[float, int]:
        """Return (step, leaving_row); leaving_row -1 means bound flip, -2 unbounded."""
        rows, vals = self.cols[j]
        g = direction * (self.basis_inv[:, rows] @ vals)
        self._last_g = g
        xb = self.x[self.basis]
        lb = self.lower[self.basis]
        ub = self.upper[self.basis]
        with np.errstate(divide="ignore", invalid="ignore"):
            lim = np.where(
                g > self.cfg.pivot_tol,
                (xb - lb) / g,
                np.where(g < -self.cfg.pivot_tol, (xb - ub) / g, math.inf),
            )
        lim = np.where(np.isnan(lim), math.inf, np.maximum(lim, 0.0))

        t_ext = self.upper[j] - self.lower[j]  # inf when one-sided
        t_row = float(lim.min()) if lim.size else math.inf
        if math.isinf(t_row) and math.isinf(t_ext):
            return (math.inf, -2)
        if t_ext <= t_row:
            return (t_ext, -1)
        near = np.nonzero(lim <= t_row + _TIE_TOL * max(1.0, abs(t_row)))[0]
        r = int(near[np.argmin(self.basis[near])])
        return (t_row, r)

    # -- main loop ------------------------------------------------------------

    def _iterate(self, phase: int) -> str:
        cfg = self.cfg
        while True:
            if self.iterations >= cfg.iteration_limit:
                raise SimplexStalledError(
                    f"simplex stalled after {self.iterations} iterations"
                )
            pick = self._choose_entering()
            if pick is None:
                # Confirm optimality on a freshly factorized basis; product-form
                # drift can hide an improving column.
                if self.pivots_since_refactor > 0:
                    self._refactor()
                    pick = self._choose_entering()
                    if pick is None:
                        return OPTIMAL
                else:
                    return OPTIMAL
            j, direction, d_enter = pick
            t, r = self._ratio_test(j, direction)
            if r == -2:
                return UNBOUNDED
            self.iterations += 1

            if t <= _DEGEN_TOL:
                self.degenerate_run += 1
                if self.degenerate_run > self.bland_trigger:
                    self.bland = True
            else:
                self.degenerate_run = 0
                self.bland = False

            g = self._last_g
            if r == -1:
                # entering variable runs to its opposite bound; basis unchanged
                self.x[self.basis] = self.x[self.basis] - t * g
                self.x[j] += direction * t
                self.status[j] = _AT_UPPER if direction > 0 else _AT_LOWER
                continue

            leave = int(self.basis[r])
            self.x[self.basis] = self.x[self.basis] - t * g
            self.x[j] = self.x[j] + direction * t
            # the leaving variable lands on whichever of its bounds blocked
            if g[r] > 0:
                self.x[leave] = self.lower[leave]
                self.status[leave] = _AT_LOWER
            else:
                self.x[leave] = self.upper[leave]
                self.status[leave] = _AT_UPPER
            self.status[j] = _BASIC
            self.basis[r] = j

            w = direction * g
            pivot = w[r]
            # dual update y' = y + (d_j / w_r) * (old r-th row of the inverse)
            self.y = self.y + (d_enter / pivot) * self.basis_inv[r]
            row_r = self.basis_inv[r] / pivot
            if _dger is not None:
                w_adj = w.copy()
                w_adj[r] = 0.0
                # C-ordered basis_inv: update its F-ordered transpose view
                _dger(-1.0, row_r, w_adj, a=self.basis_inv.T, overwrite_a=1)
                self.basis_inv[r] = row_r
            else:
                self.basis_inv -= np.outer(w, row_r)
                self.basis_inv[r] = row_r

            self.pivots_since_refactor += 1
            if self.pivots_since_refactor >= cfg.refactor_every:
                self._refactor()

    def run(self) -> LpSolution:
        m, n = self.m, self.n_struct

        if self.n_art:
            # phase 1: drive the artificials to zero
            self.c[:] = 0.0
            self.c[self.art0:] = -1.0
            self.y = self.c[self.basis] @ self.basis_inv
            if self._iterate(phase=1) == UNBOUNDED:
                raise SolverError("phase-1 objective reported unbounded; numerical failure")
            infeas = float(self.x[self.art0:].sum())
            if infeas > self.cfg.feas_tol:
                return LpSolution(
                    INFEASIBLE,
                    self.x[:n].copy(),
                    np.zeros(m),
                    np.zeros(n),
                    math.nan,
                    math.nan,
                    self.iterations,
                )
            # lock artificials at zero for phase 2
            self.lower[self.art0:] = 0.0
            self.upper[self.art0:] = 0.0
            art = self.x[self.art0:]
            self.x[self.art0:] = np.where(np.abs(art) < 1e-12, 0.0, art)

        self.c = self.obj_struct.copy()
        self.y = self.c[self.basis] @ self.basis_inv
        self.bland = False
        self.degenerate_run = 0
        status = self._iterate(phase=2)
        if status == UNBOUNDED:
            return LpSolution(
                UNBOUNDED,
                self.x[:n].copy(),
                np.zeros(m),
                np.zeros(n),
                math.inf,
                math.inf,
                self.iterations,
            )

        self._refactor()
        y = self.y
        d = self.c[:n] - self.A[:, :n].T @ y
        x = self.x[:n].copy()
        objective = float(self.obj_struct[:n] @ x)
        dual_obj = float(y @ self.b)
        for j in range(n):
            if self.status[j] != _BASIC and math.isfinite(self.x[j]) and self.x[j] != 0.0:
                dual_obj += d[j] * self.x[j]
        return LpSolution(
            status=OPTIMAL,
            x=x,
            dual=y.copy(),
            reduced_costs=d.copy(),
            objective=objective,
            dual_objective=dual_obj,
            iterations=self.iterations,
        )
