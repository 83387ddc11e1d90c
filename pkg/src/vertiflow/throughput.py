"""Throughput of momentary and extended networks, with optimality certificates.

The throughput of a momentary network is the optimum of a linear program over
per-demand link flows ``X`` and demand matrices ``D1`` (arrivals, >= 0) and
``D2`` (departures, <= 0): maximize total arrivals subject to flow
conservation, link capacities, node capacities (a through-flight consumes one
inbound plus one outbound unit at each intermediate node), per-demand balance,
and big-M caps restricting demand matrices to their origin/destination
pattern.

Every solve also extracts the full dual certificate - per-constraint-group
multiplier blocks - and checks primal feasibility, dual feasibility, and zero
duality gap by direct matrix arithmetic, so a returned throughput value is
never trusted on the solver's word alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SolverError, ValidationError
from .lp import LpModel, LpSolution, SolverConfig, solve_lp
from .network import IndicatorMatrices, Scenario

DEFAULT_CERT_TOL = 1e-6


@dataclass(frozen=True)
class FlowSolution:
    """Primal optimum: flows, demand matrices, and fulfilled amounts per pair."""

    X: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    fulfilled: np.ndarray
    throughput: float


@dataclass(frozen=True)
class DualCertificate:
    """Dual blocks matching the throughput LP's constraint groups.

    ``U1`` flow conservation, ``h1`` link capacities, ``h2`` node capacities,
    ``h3`` per-demand balance, ``U3``/``U4`` demand big-M caps, and the
    derived multipliers ``U2`` (X >= 0), ``U5`` (D1 >= 0), ``U6`` (D2 <= 0).
    """

    U1: np.ndarray
    U2: np.ndarray
    U3: np.ndarray
    U4: np.ndarray
    U5: np.ndarray
    U6: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray


@dataclass(frozen=True)
class CertificateCheck:
    passed: bool
    residuals: dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


@dataclass(frozen=True)
class ThroughputResult:
    scenario_key: tuple
    flow: FlowSolution
    certificate: DualCertificate
    verified: bool
    check: CertificateCheck
    lp_iterations: int = 0

    @property
    def throughput(self) -> float:
        return self.flow.throughput


@dataclass(frozen=True)
class _Layout:
    """Variable/row index bookkeeping for one built throughput LP."""

    n_links: int
    n_nodes: int
    n_demands: int
    big_m: float
    # variable offsets
    x0: int
    d1_0: int
    d2_0: int
    # row offsets
    r_flow: int
    r_link: int
    r_node: int
    r_colsum: int
    r_d1cap: int
    r_d2cap: int


def default_big_m(node_caps: np.ndarray) -> float:
    """No single demand can exceed the total node capacity."""
    return float(np.sum(node_caps))


def _build_flow_lp(
    indicators: IndicatorMatrices,
    link_caps: np.ndarray,
    node_caps: np.ndarray,
    big_m: float,
) -> tuple[LpModel, _Layout]:
    E = indicators.incidence
    E_abs = indicators.incidence_abs
    d1_ind = indicators.dest
    d2_ind = indicators.origin
    n_v, n_e = E.shape
    n_s = d1_ind.shape[1]
    if link_caps.shape != (n_e,) or node_caps.shape != (n_v,):
        raise ValidationError("capacity vectors do not match the incidence shapes")

    m = LpModel()
    x0 = 0
    for j in range(n_e):
        for l in range(n_s):
            m.add_var(obj=0.0, lower=0.0, name=f"X_{j}_{l}")
    d1_0 = m.n_vars
    for i in range(n_v):
        for l in range(n_s):
            m.add_var(obj=1.0, lower=0.0, name=f"D1_{i}_{l}")
    d2_0 = m.n_vars
    for i in range(n_v):
        for l in range(n_s):
            m.add_var(obj=0.0, lower=-np.inf, upper=0.0, name=f"D2_{i}_{l}")

    def xv(j: int, l: int) -> int:
        return x0 + j * n_s + l

    def d1v(i: int, l: int) -> int:
        return d1_0 + i * n_s + l

    def d2v(i: int, l: int) -> int:
        return d2_0 + i * n_s + l

    r_flow = m.n_rows
    for i in range(n_v):
        for l in range(n_s):
            coeffs = [(xv(j, l), E[i, j]) for j in range(n_e) if E[i, j] != 0.0]
            coeffs.append((d1v(i, l), -1.0))
            coeffs.append((d2v(i, l), -1.0))
            m.add_row(coeffs, "==", 0.0, name=f"flow_{i}_{l}")

    r_link = m.n_rows
    for j in range(n_e):
        m.add_row([(xv(j, l), 1.0) for l in range(n_s)], "<=", float(link_caps[j]),
                  name=f"lcap_{j}")

    r_node = m.n_rows
    for i in range(n_v):
        coeffs = [
            (xv(j, l), E_abs[i, j])
            for j in range(n_e)
            if E_abs[i, j] != 0.0
            for l in range(n_s)
        ]
        m.add_row(coeffs, "<=", float(node_caps[i]), name=f"ncap_{i}")

    r_colsum = m.n_rows
    for l in range(n_s):
        coeffs = [(d1v(i, l), 1.0) for i in range(n_v)]
        coeffs += [(d2v(i, l), 1.0) for i in range(n_v)]
        m.add_row(coeffs, "==", 0.0, name=f"bal_{l}")

    r_d1cap = m.n_rows
    for i in range(n_v):
        for l in range(n_s):
            m.add_row([(d1v(i, l), 1.0)], "<=", big_m * d1_ind[i, l], name=f"d1cap_{i}_{l}")

    r_d2cap = m.n_rows
    for i in range(n_v):
        for l in range(n_s):
            m.add_row([(d2v(i, l), -1.0)], "<=", -big_m * d2_ind[i, l], name=f"d2cap_{i}_{l}")

    layout = _Layout(
        n_links=n_e, n_nodes=n_v, n_demands=n_s, big_m=big_m,
        x0=x0, d1_0=d1_0, d2_0=d2_0,
        r_flow=r_flow, r_link=r_link, r_node=r_node,
        r_colsum=r_colsum, r_d1cap=r_d1cap, r_d2cap=r_d2cap,
    )
    return m, layout


def build_throughput_lp(
    scenario: Scenario,
    indicators: IndicatorMatrices,
    big_m: Optional[float] = None,
) -> LpModel:
    """Build the momentary-network throughput LP for one scenario."""
    if big_m is None:
        big_m = default_big_m(scenario.node_caps)
    model, _ = _build_flow_lp(indicators, scenario.link_caps, scenario.node_caps, big_m)
    return model


def _extract(
    sol: LpSolution, layout: _Layout, indicators: IndicatorMatrices
) -> tuple[FlowSolution, DualCertificate]:
    n_e, n_v, n_s = layout.n_links, layout.n_nodes, layout.n_demands
    X = sol.x[layout.x0:layout.x0 + n_e * n_s].reshape(n_e, n_s)
    D1 = sol.x[layout.d1_0:layout.d1_0 + n_v * n_s].reshape(n_v, n_s)
    D2 = sol.x[layout.d2_0:layout.d2_0 + n_v * n_s].reshape(n_v, n_s)
    fulfilled = D1.sum(axis=0)
    flow = FlowSolution(X=X, D1=D1, D2=D2, fulfilled=fulfilled,
                        throughput=float(fulfilled.sum()))

    y = sol.dual
    U1 = y[layout.r_flow:layout.r_flow + n_v * n_s].reshape(n_v, n_s)
    h1 = y[layout.r_link:layout.r_link + n_e]
    h2 = y[layout.r_node:layout.r_node + n_v]
    h3 = y[layout.r_colsum:layout.r_colsum + n_s]
    U3 = y[layout.r_d1cap:layout.r_d1cap + n_v * n_s].reshape(n_v, n_s)
    U4 = y[layout.r_d2cap:layout.r_d2cap + n_v * n_s].reshape(n_v, n_s)

    ones = np.ones((1, n_s))
    E, E_abs = indicators.incidence, indicators.incidence_abs
    U2 = E.T @ U1 + (h1[:, None] + E_abs.T @ h2[:, None]) @ ones
    U5 = -np.ones((n_v, n_s)) + np.outer(np.ones(n_v), h3) - U1 + U3
    U6 = U1 + U4 - np.outer(np.ones(n_v), h3)
    cert = DualCertificate(U1=U1, U2=U2, U3=U3, U4=U4, U5=U5, U6=U6,
                           h1=h1, h2=h2, h3=h3)
    return flow, cert


def verify_certificate(
    flow: FlowSolution,
    cert: DualCertificate,
    indicators: IndicatorMatrices,
    link_caps: np.ndarray,
    node_caps: np.ndarray,
    big_m: float,
    tol: float = DEFAULT_CERT_TOL,
) -> CertificateCheck:
    """Check primal/dual feasibility and zero duality gap by direct arithmetic.

    Shape mismatches raise :class:`ValidationError`; a certificate that merely
    fails the conditions comes back ``passed=False`` with the residuals.
    """
    E, E_abs = indicators.incidence, indicators.incidence_abs
    d1_ind, d2_ind = indicators.dest, indicators.origin
    n_v, n_e = E.shape
    n_s = d1_ind.shape[1]
    expect = {
        "X": (flow.X, (n_e, n_s)), "D1": (flow.D1, (n_v, n_s)), "D2": (flow.D2, (n_v, n_s)),
        "U1": (cert.U1, (n_v, n_s)), "U2": (cert.U2, (n_e, n_s)), "U3": (cert.U3, (n_v, n_s)),
        "U4": (cert.U4, (n_v, n_s)), "U5": (cert.U5, (n_v, n_s)), "U6": (cert.U6, (n_v, n_s)),
        "h1": (cert.h1, (n_e,)), "h2": (cert.h2, (n_v,)), "h3": (cert.h3, (n_s,)),
    }
    for name, (arr, shape) in expect.items():
        if np.shape(arr) != shape:
            raise ValidationError(f"certificate block {name}: shape {np.shape(arr)} != {shape}")

    X, D1, D2 = flow.X, flow.D1, flow.D2
    ones_s = np.ones(n_s)
    ones_v = np.ones(n_v)

    def sup(a) -> float:
        return float(np.max(a)) if np.size(a) else 0.0

    r: dict[str, float] = {}
    r["flow_conservation"] = sup(np.abs(E @ X - D1 - D2))
    r["x_nonneg"] = sup(-X)
    r["link_caps"] = sup(X @ ones_s - link_caps)
    r["node_caps"] = sup(E_abs @ X @ ones_s - node_caps)
    r["demand_balance"] = sup(np.abs(D1.T @ ones_v + D2.T @ ones_v))
    r["d1_bigm"] = sup(D1 - d1_ind * big_m)
    r["d2_bigm"] = sup(-D2 + d2_ind * big_m)
    r["d1_nonneg"] = sup(-D1)
    r["d2_nonpos"] = sup(D2)

    ones_vs = np.ones((n_v, n_s))
    r["dual_x"] = sup(np.abs(E.T @ cert.U1 - cert.U2
                             + np.outer(cert.h1 + E_abs.T @ cert.h2, ones_s)))
    r["dual_d1"] = sup(np.abs(-ones_vs + np.outer(ones_v, cert.h3)
                              - cert.U1 + cert.U3 - cert.U5))
    r["dual_d2"] = sup(np.abs(np.outer(ones_v, cert.h3) - cert.U1 - cert.U4 + cert.U6))
    r["dual_nonneg"] = sup(np.concatenate([
        (-cert.U2).ravel(), (-cert.U3).ravel(), (-cert.U4).ravel(),
        (-cert.U5).ravel(), (-cert.U6).ravel(), -cert.h1, -cert.h2,
    ]))

    primal_obj = float(D1.sum())
    dual_obj = (
        float(cert.h1 @ link_caps)
        + float(cert.h2 @ node_caps)
        + float(np.trace(cert.U3.T @ (d1_ind * big_m)))
        - float(np.trace(cert.U4.T @ (d2_ind * big_m)))
    )
    r["zero_gap"] = abs(primal_obj - dual_obj)

    passed = all(v <= tol for v in r.values())
    return CertificateCheck(passed=passed, residuals=r)


def _solve_and_certify(
    indicators: IndicatorMatrices,
    link_caps: np.ndarray,
    node_caps: np.ndarray,
    big_m: float,
    scenario_key: tuple,
    config: Optional[SolverConfig] = None,
    cert_tol: float = DEFAULT_CERT_TOL,
) -> ThroughputResult:
    model, layout = _build_flow_lp(indicators, link_caps, node_caps, big_m)
    sol = solve_lp(model, config)
    if sol.status != "optimal":
        # X = 0, D = 0 is always feasible, so anything else is a solver defect
        raise SolverError(f"throughput LP reported {sol.status}; this cannot happen")
    flow, cert = _extract(sol, layout, indicators)
    check = verify_certificate(flow, cert, indicators, link_caps, node_caps,
                               big_m, tol=cert_tol)
    return ThroughputResult(
        scenario_key=scenario_key,
        flow=flow,
        certificate=cert,
        verified=check.passed,
        check=check,
        lp_iterations=sol.iterations,
    )


def throughput(
    scenario: Scenario,
    indicators: IndicatorMatrices,
    big_m: Optional[float] = None,
    config: Optional[SolverConfig] = None,
) -> ThroughputResult:
    """Maximal total fulfilled demand of one momentary network."""
    if big_m is None:
        big_m = default_big_m(scenario.node_caps)
    return _solve_and_certify(
        indicators, scenario.link_caps, scenario.node_caps, big_m,
        scenario.key(), config,
    )


def extended_throughput(
    ext_scenario,
    indicators: IndicatorMatrices,
    big_m: Optional[float] = None,
    config: Optional[SolverConfig] = None,
) -> ThroughputResult:
    """Throughput of an extended (reserve-capacity) momentary network.

    ``ext_scenario`` comes from :func:`vertiflow.extension.extend_scenario`.
    The undisturbed case short-circuits to the original network; the
    node-disturbed case reuses the original incidence with the augmented node
    capacities; the link-disturbed case solves over the extended incidence
    with demand indicators zero-padded onto the backup rows.
    """
    case = ext_scenario.case
    if case == "none":
        return throughput(ext_scenario.scenario, indicators, big_m, config)

    if case == "node":
        if big_m is None:
            big_m = default_big_m(ext_scenario.node_caps)
        return _solve_and_certify(
            indicators, ext_scenario.link_caps, ext_scenario.node_caps, big_m,
            ext_scenario.scenario.key(), config,
        )

    ext_ind = ext_scenario.extended_indicators(indicators)
    if big_m is None:
        big_m = default_big_m(ext_scenario.node_caps)
    return _solve_and_certify(
        ext_ind, ext_scenario.link_caps, ext_scenario.node_caps, big_m,
        ext_scenario.scenario.key(), config,
    )
