"""Backup vertiport selection: where to build reserve capacity, and how much.

The planning problem picks one capacity level per candidate site (binary
selection matrix ``Z``, one level per row, level 0 meaning "build nothing")
to maximize expected throughput over all disruption scenarios minus
``valuation * construction_cost``, subject to a budget.

Three interchangeable solution methods are provided and must agree:

``dual-milp``
    The single-level reformulation that embeds, per scenario, the throughput
    LP's primal constraints, dual-feasibility constraints, and a zero-duality-
    gap equality whose bilinear capacity-times-dual products are linearized
    with big-M selection constraints.  Multiplier blocks that occur only as
    slacks of the dual-feasibility rows are left implicit, which shrinks the
    model without changing its feasible objective values.

``direct-milp``
    Embeds only the primal flow blocks and writes the extended capacities as
    affine functions of ``Z``; correct here because every scenario's flow
    enters the objective with nonnegative weight, so the optimizer pushes
    each block to its per-scenario optimum.

``brute-force``
    Exhaustive enumeration of selections with per-scenario LP evaluation;
    the reference oracle for the other two.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import SolverError, ValidationError
from .extension import BackupTopology, CandidateSet, extend_scenario
from .lp import LpModel, MipModel, SolverConfig, solve_lp, solve_mip
from .network import DemandSet, RiskNetwork, Scenario, build_incidence, enumerate_scenarios
from .throughput import default_big_m, extended_throughput, throughput

_TIE_TOL = 1e-9
BRUTE_FORCE_CAP = 3 ** 10

METHODS = ("dual-milp", "direct-milp", "brute-force")


@dataclass(frozen=True)
class DesignSpec:
    """Inputs of one planning run; big-M values default from the instance."""

    network: RiskNetwork
    demands: DemandSet
    candidates: CandidateSet
    topology: BackupTopology
    budget: float
    valuation: float
    big_m: Optional[float] = None
    big_m_lambda: Optional[float] = None

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise ValidationError("budget must be nonnegative")
        if self.valuation <= 0:
            raise ValidationError("valuation factor must be positive")
        if self.topology.candidates is not self.candidates:
            if self.topology.candidates.ids != self.candidates.ids:
                raise ValidationError("topology was built for a different candidate set")
        if self.topology.network is not self.network:
            if self.topology.network.n_nodes != self.network.n_nodes:
                raise ValidationError("topology was built for a different network")

    def resolved_big_m(self) -> float:
        # no single demand can exceed total undisturbed node capacity
        return self.big_m if self.big_m is not None else default_big_m(
            self.network.node_capacities()
        )

    def resolved_big_m_lambda(self) -> float:
        if self.big_m_lambda is not None:
            return self.big_m_lambda
        return (self.demands.count + 1) * float(np.max(self.candidates.cap_levels))


def validate_selection(Z: np.ndarray, candidates: CandidateSet) -> np.ndarray:
    Z = np.asarray(Z)
    if Z.shape != (candidates.count, candidates.n_levels):
        raise ValidationError(
            f"selection matrix must be {candidates.count} x {candidates.n_levels}"
        )
    if not np.all((Z == 0) | (Z == 1)):
        raise ValidationError("selection entries must be binary")
    if not np.all(Z.sum(axis=1) == 1):
        raise ValidationError("each selection row must choose exactly one level")
    return Z.astype(float)


def capacity_from_selection(Z: np.ndarray, candidates: CandidateSet) -> np.ndarray:
    """Built capacity per candidate: row-wise selected level."""
    Zf = validate_selection(Z, candidates)
    return (candidates.cap_levels * Zf).sum(axis=1)


def selection_cost(Z: np.ndarray, candidates: CandidateSet) -> float:
    Zf = validate_selection(Z, candidates)
    return float((candidates.costs * Zf).sum())


def _within_budget(cost: float, budget: float, integral: bool) -> bool:
    return cost <= budget if integral else cost <= budget + 1e-9


def _costs_integral(spec: DesignSpec) -> bool:
    return float(spec.budget).is_integer() and bool(
        np.all(np.equal(np.mod(spec.candidates.costs, 1.0), 0.0))
    )


@dataclass
class DesignResult:
    """One solved design plus everything needed to audit it."""

    Z: np.ndarray
    built_caps: np.ndarray
    total_cost: float
    objective: float
    expected_throughput: float
    per_scenario: tuple[tuple[tuple, float, float], ...]
    method: str
    nodes_explored: int
    wall_time: float
    milp_objective: Optional[float] = None
    bigm_flags: tuple[str, ...] = ()
    solution: Optional[np.ndarray] = field(default=None, repr=False)
    _info: Optional["_MilpInfo"] = field(default=None, repr=False)


class DesignEvaluator:
    """Per-scenario throughput evaluation with memoization across selections.

    A scenario's extended throughput depends only on the capacities of the
    candidates that can actually serve it (qualified detour candidates for a
    disturbed link, adjacent candidates for a disturbed node), so evaluations
    are cached per scenario under that restricted capacity pattern.
    """

    def __init__(self, spec: DesignSpec, config: Optional[SolverConfig] = None) -> None:
        self.spec = spec
        self.config = config
        self.indicators = build_incidence(spec.network, spec.demands)
        self.scenarios = enumerate_scenarios(spec.network)
        self.big_m = spec.resolved_big_m()
        self._orig: dict[int, float] = {}
        self._ext: dict[tuple[int, tuple], float] = {}
        self._relevant: list[tuple[int, ...]] = []
        topo = spec.topology
        for s in self.scenarios:
            if s.disturbed is None:
                self._relevant.append(())
            elif s.disturbed[0] == "link":
                self._relevant.append(tuple(topo.detours[s.disturbed[1]]))
            else:
                adj = np.nonzero(topo.delta_adj[s.disturbed[1]])[0]
                self._relevant.append(tuple(int(c) for c in adj))

    def original(self, idx: int) -> float:
        if idx not in self._orig:
            res = throughput(self.scenarios[idx], self.indicators,
                             big_m=self.big_m, config=self.config)
            if not res.verified:
                raise SolverError(
                    f"unverified throughput certificate for scenario {res.scenario_key}"
                )
            self._orig[idx] = res.throughput
        return self._orig[idx]

    def extended(self, idx: int, backup_caps: np.ndarray) -> float:
        rel = self._relevant[idx]
        pattern = tuple(float(backup_caps[c]) for c in rel)
        if not rel or all(v == 0.0 for v in pattern):
            return self.original(idx)
        key = (idx, pattern)
        if key not in self._ext:
            ext = extend_scenario(self.scenarios[idx], self.spec.topology, backup_caps)
            big_m = self.big_m + float(np.sum(backup_caps)) if ext.case == "link" else self.big_m
            res = extended_throughput(ext, self.indicators, big_m=big_m, config=self.config)
            if not res.verified:
                raise SolverError(
                    f"unverified extended certificate for scenario {res.scenario_key}"
                )
            self._ext[key] = res.throughput
        return self._ext[key]

    def expected(self, backup_caps: np.ndarray) -> tuple[float, list[tuple[tuple, float, float]]]:
        total = 0.0
        rows: list[tuple[tuple, float, float]] = []
        for idx, s in enumerate(self.scenarios):
            value = self.original(idx) if s.disturbed is None else self.extended(idx, backup_caps)
            rows.append((s.key(), s.probability, value))
            total += s.probability * value
        return total, rows


def expected_throughput(
    spec: DesignSpec, Z: np.ndarray, config: Optional[SolverConfig] = None
) -> float:
    """Expected throughput of the extended network under selection ``Z``."""
    caps = capacity_from_selection(Z, spec.candidates)
    value, _ = DesignEvaluator(spec, config).expected(caps)
    return value


# ---------------------------------------------------------------------------
# MILP construction
# ---------------------------------------------------------------------------


@dataclass
class _Block:
    """Index bookkeeping for one scenario's variable/row blocks."""

    scen_idx: int
    key: tuple
    case: str
    p: float
    n_r: int  # node rows of this block's incidence
    n_c: int  # link columns
    n_s: int
    x0: int = 0
    d1_0: int = 0
    d2_0: int = 0
    # dual blocks (dual-milp only)
    u1_0: int = -1
    u3_0: int = -1
    u4_0: int = -1
    h1_0: int = -1
    h2_0: int = -1
    h3_0: int = -1
    lam: dict = field(default_factory=dict)
    zero_gap_row: int = -1
    # constants
    link_caps_const: np.ndarray = None
    node_caps_const: np.ndarray = None
    dest: np.ndarray = None
    origin: np.ndarray = None
    backup_link_cand: dict = field(default_factory=dict)  # link col -> candidate idx
    disturbed_node: int = -1
    incidence: np.ndarray = None


@dataclass
class _MilpInfo:
    z0: int
    n_cands: int
    n_levels: int
    big_m: float
    big_m_lambda: float
    constant: float
    blocks: list[_Block] = field(default_factory=list)

    def z_index(self, i: int, m: int) -> int:
        return self.z0 + i * self.n_levels + m


def _scenario_block(spec: DesignSpec, indicators, idx: int, s: Scenario) -> _Block:
    """Shapes, constants, and candidate hooks for one disturbed scenario."""
    topo = spec.topology
    n_v, n_e, n_s = spec.network.n_nodes, spec.network.n_links, spec.demands.count
    kind, element = s.disturbed
    if kind == "link":
        ext = extend_scenario(s, topo, np.zeros(topo.n_candidates))
        E = ext.incidence
        n_r, n_c = E.shape
        pad = np.zeros((topo.n_candidates, n_s))
        dest = np.vstack([indicators.dest, pad])
        origin = np.vstack([indicators.origin, pad])
        block = _Block(scen_idx=idx, key=s.key(), case="link", p=s.probability,
                       n_r=n_r, n_c=n_c, n_s=n_s,
                       link_caps_const=s.link_caps, node_caps_const=s.node_caps,
                       dest=dest, origin=origin)
        block.incidence = E
        for e in topo.backup_links:
            block.backup_link_cand[e.id] = topo.backup_node_of(e)
        return block
    block = _Block(scen_idx=idx, key=s.key(), case="node", p=s.probability,
                   n_r=n_v, n_c=n_e, n_s=n_s,
                   link_caps_const=s.link_caps, node_caps_const=s.node_caps,
                   dest=indicators.dest, origin=indicators.origin,
                   disturbed_node=element)
    block.incidence = indicators.incidence
    return block


def _build_milp(
    spec: DesignSpec,
    dual: bool,
    big_m: Optional[float] = None,
    big_m_lambda: Optional[float] = None,
) -> tuple[MipModel, _MilpInfo]:
    indicators = build_incidence(spec.network, spec.demands)
    scenarios = enumerate_scenarios(spec.network)
    topo = spec.topology
    cands = spec.candidates
    n_cands, K = cands.count, cands.n_levels
    M = big_m if big_m is not None else spec.resolved_big_m()
    M_lam = big_m_lambda if big_m_lambda is not None else spec.resolved_big_m_lambda()

    m = LpModel()
    info = _MilpInfo(z0=0, n_cands=n_cands, n_levels=K, big_m=M,
                     big_m_lambda=M_lam, constant=0.0)

    # selection binaries; excluded candidates pinned to the null level
    for i in range(n_cands):
        for lvl in range(K):
            m.add_var(obj=-spec.valuation * float(cands.costs[i, lvl]),
                      lower=0.0, upper=1.0, name=f"z_{i}_{lvl}")
    binaries = frozenset(range(n_cands * K))
    for i in range(n_cands):
        m.add_row([(info.z_index(i, lvl), 1.0) for lvl in range(K)], "==", 1.0,
                  name=f"pick_{i}")
    for i in topo.excluded:
        m.lower[info.z_index(i, 0)] = 1.0
        for lvl in range(1, K):
            m.upper[info.z_index(i, lvl)] = 0.0
    m.add_row(
        [(info.z_index(i, lvl), float(cands.costs[i, lvl]))
         for i in range(n_cands) for lvl in range(K)],
        "<=", float(spec.budget), name="budget",
    )

    def cap_terms(ci: int, sign: float) -> list[tuple[int, float]]:
        return [(info.z_index(ci, lvl), sign * float(cands.cap_levels[ci, lvl]))
                for lvl in range(K) if cands.cap_levels[ci, lvl] != 0.0]

    for idx, s in enumerate(scenarios):
        if s.disturbed is None:
            continue
        blk = _scenario_block(spec, indicators, idx, s)
        E = blk.incidence
        E_abs = np.abs(E)
        n_r, n_c, n_s = blk.n_r, blk.n_c, blk.n_s
        tag = f"s{idx}"

        # demand big-M pattern caps are imposed as variable bounds: entries off
        # the origin/destination pattern are fixed at zero, on-pattern entries
        # capped at M (equivalent to the row form, and much smaller)
        blk.x0 = m.n_vars
        m.add_vars(n_c * n_s, obj=0.0, prefix=f"{tag}_X")
        blk.d1_0 = m.n_vars
        for i in range(n_r):
            for l in range(n_s):
                m.add_var(obj=blk.p, lower=0.0, upper=M * blk.dest[i, l],
                          name=f"{tag}_D1_{i}_{l}")
        blk.d2_0 = m.n_vars
        for i in range(n_r):
            for l in range(n_s):
                m.add_var(obj=0.0, lower=M * blk.origin[i, l], upper=0.0,
                          name=f"{tag}_D2_{i}_{l}")

        def xv(j, l):
            return blk.x0 + j * n_s + l

        def d1v(i, l):
            return blk.d1_0 + i * n_s + l

        def d2v(i, l):
            return blk.d2_0 + i * n_s + l

        # flow conservation
        for i in range(n_r):
            for l in range(n_s):
                coeffs = [(xv(j, l), E[i, j]) for j in range(n_c) if E[i, j] != 0.0]
                coeffs += [(d1v(i, l), -1.0), (d2v(i, l), -1.0)]
                m.add_row(coeffs, "==", 0.0, name=f"{tag}_flow_{i}_{l}")

        # link capacities: constants for original links, affine in Z for backups
        n_e = spec.network.n_links
        for j in range(n_c):
            coeffs = [(xv(j, l), 1.0) for l in range(n_s)]
            if j < n_e:
                m.add_row(coeffs, "<=", float(blk.link_caps_const[j]), name=f"{tag}_lcap_{j}")
            else:
                ci = blk.backup_link_cand[j]
                m.add_row(coeffs + cap_terms(ci, -1.0), "<=", 0.0, name=f"{tag}_lcap_{j}")

        # node capacities
        n_v = spec.network.n_nodes
        for i in range(n_r):
            coeffs = [(xv(j, l), E_abs[i, j]) for j in range(n_c) if E_abs[i, j] != 0.0
                      for l in range(n_s)]
            if i < n_v:
                extra: list[tuple[int, float]] = []
                if blk.case == "node" and i == blk.disturbed_node:
                    for ci in np.nonzero(topo.delta_adj[i])[0]:
                        extra += cap_terms(int(ci), -1.0)
                m.add_row(coeffs + extra, "<=", float(blk.node_caps_const[i]),
                          name=f"{tag}_ncap_{i}")
            else:
                ci = i - n_v
                m.add_row(coeffs + cap_terms(ci, -1.0), "<=", 0.0, name=f"{tag}_ncap_{i}")

        # per-demand balance
        for l in range(n_s):
            coeffs = [(d1v(i, l), 1.0) for i in range(n_r)]
            coeffs += [(d2v(i, l), 1.0) for i in range(n_r)]
            m.add_row(coeffs, "==", 0.0, name=f"{tag}_bal_{l}")

        if dual:
            _add_dual_block(m, spec, info, blk, E, E_abs, M, M_lam, tag, cap_terms)

        info.blocks.append(blk)

    return MipModel(lp=m, binaries=binaries), info


def _add_dual_block(m, spec, info, blk, E, E_abs, M, M_lam, tag, cap_terms) -> None:
    """Dual feasibility plus the linearized zero-duality-gap equality.

    Multipliers for X >= 0, D1 >= 0, D2 <= 0 appear only as slacks of the
    three stationarity identities, so those identities are written directly
    as inequalities of the retained blocks (U1, U3, U4, h1, h2, h3).
    """
    n_r, n_c, n_s = blk.n_r, blk.n_c, blk.n_s
    n_e, n_v = spec.network.n_links, spec.network.n_nodes
    cands = spec.candidates
    topo = spec.topology
    K = cands.n_levels

    blk.u1_0 = m.n_vars
    for t in range(n_r * n_s):
        m.add_var(obj=0.0, lower=-math.inf, name=f"{tag}_U1_{t}")
    blk.u3_0 = m.n_vars
    m.add_vars(n_r * n_s, obj=0.0, prefix=f"{tag}_U3_")
    blk.u4_0 = m.n_vars
    m.add_vars(n_r * n_s, obj=0.0, prefix=f"{tag}_U4_")
    blk.h1_0 = m.n_vars
    m.add_vars(n_c, obj=0.0, prefix=f"{tag}_h1_")
    blk.h2_0 = m.n_vars
    m.add_vars(n_r, obj=0.0, prefix=f"{tag}_h2_")
    blk.h3_0 = m.n_vars
    for t in range(n_s):
        m.add_var(obj=0.0, lower=-math.inf, name=f"{tag}_h3_{t}")

    def u1v(i, l):
        return blk.u1_0 + i * n_s + l

    def u3v(i, l):
        return blk.u3_0 + i * n_s + l

    def u4v(i, l):
        return blk.u4_0 + i * n_s + l

    # stationarity wrt X: E^T U1 + (h1 + E_+^T h2) 1^T >= 0
    for j in range(n_c):
        for l in range(n_s):
            coeffs = [(u1v(i, l), E[i, j]) for i in range(n_r) if E[i, j] != 0.0]
            coeffs.append((blk.h1_0 + j, 1.0))
            coeffs += [(blk.h2_0 + i, E_abs[i, j]) for i in range(n_r) if E_abs[i, j] != 0.0]
            m.add_row(coeffs, ">=", 0.0, name=f"{tag}_dx_{j}_{l}")
    # stationarity wrt D1: -1 + h3_l - U1 + U3 >= 0
    for i in range(n_r):
        for l in range(n_s):
            m.add_row([(blk.h3_0 + l, 1.0), (u1v(i, l), -1.0), (u3v(i, l), 1.0)],
                      ">=", 1.0, name=f"{tag}_dd1_{i}_{l}")
    # stationarity wrt D2: h3_l - U1 - U4 <= 0
    for i in range(n_r):
        for l in range(n_s):
            m.add_row([(blk.h3_0 + l, 1.0), (u1v(i, l), -1.0), (u4v(i, l), -1.0)],
                      "<=", 0.0, name=f"{tag}_dd2_{i}_{l}")

    # lambda blocks linearize capacity x dual products that involve Z
    def add_lambda(name: str, defining: list[list[tuple[int, float]]]) -> tuple[int, int]:
        lam0 = m.n_vars
        m.add_vars(cands.count * K, obj=0.0, prefix=f"{tag}_{name}_")
        lamp0 = m.n_vars
        m.add_vars(cands.count * K, obj=0.0, prefix=f"{tag}_{name}p_")
        for i in range(cands.count):
            for lvl in range(K):
                t = i * K + lvl
                m.add_row([(lam0 + t, 1.0)] + defining[t], "==", 0.0,
                          name=f"{tag}_{name}def_{t}")
                zi = info.z_index(i, lvl)
                m.add_row([(lamp0 + t, 1.0), (zi, -M_lam)], "<=", 0.0,
                          name=f"{tag}_{name}ub_{t}")
                m.add_row([(lam0 + t, 1.0), (lamp0 + t, -1.0)], ">=", 0.0,
                          name=f"{tag}_{name}ge_{t}")
                m.add_row([(lam0 + t, 1.0), (lamp0 + t, -1.0), (zi, M_lam)], "<=", M_lam,
                          name=f"{tag}_{name}res_{t}")
        blk.lam[name] = lam0
        blk.lam[name + "p"] = lamp0
        return lam0, lamp0

    gap: list[tuple[int, float]] = []
    # total arrivals
    for i in range(n_r):
        for l in range(n_s):
            gap.append((blk.d1_0 + i * n_s + l, 1.0))
    # minus constant-capacity dual products
    for j in range(min(n_c, n_e)):
        gap.append((blk.h1_0 + j, -float(blk.link_caps_const[j])))
    for i in range(min(n_r, n_v)):
        gap.append((blk.h2_0 + i, -float(blk.node_caps_const[i])))
    # minus the demand-cap trace terms
    for i in range(n_r):
        for l in range(n_s):
            if blk.dest[i, l]:
                gap.append((u3v(i, l), -M))
            if blk.origin[i, l]:
                gap.append((u4v(i, l), -M))

    if blk.case == "link":
        # backup link capacities: Lambda1 = C . (links-per-candidate sum of h1)
        per_cand_links: dict[int, list[int]] = {}
        for j, ci in blk.backup_link_cand.items():
            per_cand_links.setdefault(ci, []).append(j)
        defining1 = []
        defining2 = []
        for i in range(cands.count):
            for lvl in range(K):
                c = float(cands.cap_levels[i, lvl])
                defining1.append([(blk.h1_0 + j, -c) for j in per_cand_links.get(i, [])])
                defining2.append([(blk.h2_0 + n_v + i, -c)])
        lam1, lam1p = add_lambda("L1", defining1)
        lam2, lam2p = add_lambda("L2", defining2)
        for t in range(cands.count * K):
            gap.append((lam1p + t, -1.0))
            gap.append((lam2p + t, -1.0))
    else:
        a = blk.disturbed_node
        defining3 = []
        for i in range(cands.count):
            adj = float(topo.delta_adj[a, i])
            for lvl in range(K):
                c = float(cands.cap_levels[i, lvl])
                defining3.append([(blk.h2_0 + a, -c * adj)] if c * adj != 0.0 else [])
        lam3, lam3p = add_lambda("L3", defining3)
        for t in range(cands.count * K):
            gap.append((lam3p + t, -1.0))

    blk.zero_gap_row = m.add_row(gap, "==", 0.0, name=f"{tag}_zerogap")


def build_direct_milp(spec: DesignSpec) -> MipModel:
    """Joint MILP with per-scenario primal blocks and Z-affine capacities."""
    model, _ = _build_milp(spec, dual=False)
    return model


def build_dual_milp(spec: DesignSpec) -> MipModel:
    """Single-level MILP embedding per-scenario optimality certificates."""
    model, _ = _build_milp(spec, dual=True)
    return model


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


def _undisturbed_constant(evaluator: DesignEvaluator) -> float:
    p0 = evaluator.scenarios[0].probability
    return p0 * evaluator.original(0) if p0 > 0 else 0.0


def _solve_brute(spec: DesignSpec, config: Optional[SolverConfig],
                 max_combinations: int,
                 evaluator: Optional[DesignEvaluator] = None) -> DesignResult:
    t0 = time.perf_counter()
    evaluator = evaluator if evaluator is not None else DesignEvaluator(spec, config)
    cands = spec.candidates
    n, K = cands.count, cands.n_levels
    active = [i for i in range(n) if i not in spec.topology.excluded]
    total = K ** len(active)
    if total > max_combinations:
        raise ValidationError(
            f"brute force refused: {K}^{len(active)} = {total} selections exceeds "
            f"the cap of {max_combinations}"
        )
    integral = _costs_integral(spec)

    best = None
    best_obj = -math.inf
    best_flat: tuple[int, ...] = ()
    evaluated = 0
    for combo in itertools.product(range(K), repeat=len(active)):
        Z = np.zeros((n, K), dtype=int)
        Z[:, 0] = 1
        for pos, lvl in zip(active, combo):
            Z[pos, 0] = 0
            Z[pos, lvl] = 1
        cost = selection_cost(Z, cands)
        if not _within_budget(cost, spec.budget, integral):
            continue
        caps = capacity_from_selection(Z, cands)
        value, rows = evaluator.expected(caps)
        obj = value - spec.valuation * cost
        evaluated += 1
        flat = tuple(int(v) for v in Z.ravel())
        better = obj > best_obj + _TIE_TOL
        tied_smaller = abs(obj - best_obj) <= _TIE_TOL and flat < best_flat
        if best is None or better or tied_smaller:
            best_obj = max(best_obj, obj)
            best_flat = flat
            best = DesignResult(
                Z=Z, built_caps=caps, total_cost=cost, objective=obj,
                expected_throughput=value, per_scenario=tuple(rows),
                method="brute-force", nodes_explored=evaluated, wall_time=0.0,
            )
    if best is None:
        raise SolverError("no feasible selection; the null design should always fit")
    best.nodes_explored = evaluated
    best.wall_time = time.perf_counter() - t0
    return best


def _solve_milp_method(spec: DesignSpec, dual: bool, config: Optional[SolverConfig],
                       big_m: Optional[float] = None,
                       big_m_lambda: Optional[float] = None,
                       evaluator: Optional[DesignEvaluator] = None) -> DesignResult:
    t0 = time.perf_counter()
    cfg = config or SolverConfig()
    model, info = _build_milp(spec, dual=dual, big_m=big_m, big_m_lambda=big_m_lambda)
    sol = solve_mip(model, cfg)
    if sol.status != "optimal":
        raise SolverError(f"design MILP returned status {sol.status}")

    cands = spec.candidates
    Z = np.zeros((cands.count, cands.n_levels), dtype=int)
    for i in range(cands.count):
        for lvl in range(cands.n_levels):
            Z[i, lvl] = int(round(sol.x[info.z_index(i, lvl)]))
    caps = capacity_from_selection(Z, cands)
    cost = selection_cost(Z, cands)

    evaluator = evaluator if evaluator is not None else DesignEvaluator(spec, config)
    constant = _undisturbed_constant(evaluator)
    value, rows = evaluator.expected(caps)
    result = DesignResult(
        Z=Z, built_caps=caps, total_cost=cost,
        objective=value - spec.valuation * cost,
        expected_throughput=value, per_scenario=tuple(rows),
        method="dual-milp" if dual else "direct-milp",
        nodes_explored=sol.nodes, wall_time=time.perf_counter() - t0,
        milp_objective=sol.objective + constant,
        solution=sol.x, _info=info,
    )
    if dual:
        result.bigm_flags = tuple(_scan_bigm(result))
    return result


def solve_design(
    spec: DesignSpec,
    method: str = "direct-milp",
    config: Optional[SolverConfig] = None,
    max_combinations: int = BRUTE_FORCE_CAP,
    evaluator: Optional[DesignEvaluator] = None,
) -> DesignResult:
    """Solve the selection problem with the requested method.

    All three methods maximize the same objective and agree in optimal value;
    they may return different (equally good) selections.  Passing a shared
    ``evaluator`` reuses per-scenario throughput caches across solves of the
    same instance (budget/valuation sweeps).
    """
    if method == "brute-force":
        return _solve_brute(spec, config, max_combinations, evaluator=evaluator)
    if method == "direct-milp":
        return _solve_milp_method(spec, dual=False, config=config, evaluator=evaluator)
    if method == "dual-milp":
        return _solve_milp_method(spec, dual=True, config=config, evaluator=evaluator)
    raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")


# ---------------------------------------------------------------------------
# big-M auditing and certificate residuals
# ---------------------------------------------------------------------------


def _scan_bigm(result: DesignResult) -> list[str]:
    """Flag demand or lambda entries sitting within 1e-6*M of their big-M cap."""
    info, x = result._info, result.solution
    if info is None or x is None:
        raise ValidationError("big-M scan requires a MILP-produced result")
    flags: list[str] = []
    M, M_lam = info.big_m, info.big_m_lambda
    for blk in info.blocks:
        n_r, n_s = blk.n_r, blk.n_s
        for i in range(n_r):
            for l in range(n_s):
                if blk.dest[i, l] and x[blk.d1_0 + i * n_s + l] >= M * (1 - 1e-6):
                    flags.append(f"scenario {blk.key}: D1[{i},{l}] binds demand big-M")
                if blk.origin[i, l] and -x[blk.d2_0 + i * n_s + l] >= M * (1 - 1e-6):
                    flags.append(f"scenario {blk.key}: D2[{i},{l}] binds demand big-M")
        for name, off in blk.lam.items():
            for t in range(info.n_cands * info.n_levels):
                if x[off + t] >= M_lam * (1 - 1e-6):
                    flags.append(f"scenario {blk.key}: {name}[{t}] binds lambda big-M")
    return flags


@dataclass(frozen=True)
class BigMReport:
    flags: tuple[str, ...]
    attempts: int
    objective_change: float
    status: str  # 'ok' | 'stable' | 'bigM-suspect'


def validate_bigM(result: DesignResult, spec: DesignSpec,
                  config: Optional[SolverConfig] = None) -> BigMReport:
    """Audit a dual-milp result's big-M choices.

    Re-solves with doubled M values: a clean result whose objective is
    unchanged is reported ``stable``; flagged results are re-solved with
    doubled constants up to 3 times and marked ``bigM-suspect`` if entries
    still bind afterwards.
    """
    if result.method != "dual-milp":
        raise ValidationError("big-M validation applies to dual-milp results")
    flags = list(result.bigm_flags)
    base_obj = result.objective
    M = result._info.big_m
    M_lam = result._info.big_m_lambda

    if not flags:
        redo = _solve_milp_method(spec, dual=True, config=config,
                                  big_m=2 * M, big_m_lambda=2 * M_lam)
        change = abs(redo.objective - base_obj)
        status = "stable" if change <= 1e-6 else "bigM-suspect"
        return BigMReport(flags=(), attempts=1, objective_change=change, status=status)

    attempts = 0
    current = result
    while attempts < 3 and current.bigm_flags:
        attempts += 1
        M *= 2
        M_lam *= 2
        current = _solve_milp_method(spec, dual=True, config=config,
                                     big_m=M, big_m_lambda=M_lam)
    change = abs(current.objective - base_obj)
    status = "bigM-suspect" if current.bigm_flags else "ok"
    return BigMReport(flags=tuple(flags), attempts=attempts,
                      objective_change=change, status=status)


def zero_gap_residuals(result: DesignResult, spec: DesignSpec) -> list[float]:
    """Per-scenario residual of the embedded zero-duality-gap equality.

    Evaluates, from the raw MILP solution, |arrivals - dual objective| where
    the dual objective uses the capacities realized by the solved selection.
    """
    info, x = result._info, result.solution
    if info is None or x is None:
        raise ValidationError("zero-gap residuals require a dual-milp result")
    caps = result.built_caps
    topo = spec.topology
    n_e, n_v = spec.network.n_links, spec.network.n_nodes
    out: list[float] = []
    for blk in info.blocks:
        if blk.h1_0 < 0:
            raise ValidationError("result was not produced by the dual formulation")
        n_r, n_c, n_s = blk.n_r, blk.n_c, blk.n_s
        arrivals = sum(x[blk.d1_0 + t] for t in range(n_r * n_s))
        dual_obj = 0.0
        for j in range(n_c):
            cap = (float(blk.link_caps_const[j]) if j < n_e
                   else float(caps[blk.backup_link_cand[j]]))
            dual_obj += x[blk.h1_0 + j] * cap
        for i in range(n_r):
            if i < n_v:
                cap = float(blk.node_caps_const[i])
                if blk.case == "node" and i == blk.disturbed_node:
                    cap += float(topo.delta_adj[i] @ caps)
            else:
                cap = float(caps[i - n_v])
            dual_obj += x[blk.h2_0 + i] * cap
        for i in range(n_r):
            for l in range(n_s):
                t = i * n_s + l
                if blk.dest[i, l]:
                    dual_obj += info.big_m * x[blk.u3_0 + t]
                if blk.origin[i, l]:
                    dual_obj += info.big_m * x[blk.u4_0 + t]
        out.append(abs(arrivals - dual_obj))
    return out
