"""Risk-aware network data model, scenario enumeration, and incidence algebra.

A :class:`RiskNetwork` is a directed graph of vertiports (nodes) and flight
corridors (links) in which every element carries an undisturbed capacity and a
discrete distribution over degraded capacities.  At any moment at most one
element is degraded; :func:`enumerate_scenarios` expands the distribution into
the full list of momentary networks with their probabilities.

Disruption probabilities are stored factored: a global probability that the
network is disturbed at all (``p_dis``), a per-element weight saying which
element is the disturbed one (weights sum to 1), and a per-element conditional
distribution over that element's degraded capacity levels.  The absolute
probability of element ``ev`` sitting at level ``k`` is then
``p_dis * weight[ev] * cond[ev][k]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import ValidationError

PROB_TOL = 1e-9


@dataclass(frozen=True)
class Node:
    """A vertiport: planar position in kilometers plus a landing/takeoff capacity.

    Capacity is counted in flights per unit time.  Note that the node capacity
    constraint charges a through-flight twice (once inbound, once outbound),
    so an intermediate stop consumes two units of the node's capacity.
    """

    id: int
    position: tuple[float, float]
    capacity: float

    def __post_init__(self) -> None:
        if len(self.position) != 2:
            raise ValidationError(f"node {self.id}: position must be 2-D")


@dataclass(frozen=True)
class Link:
    """A directed flight corridor from ``tail`` to ``head``."""

    id: int
    tail: int
    head: int
    capacity: float


@dataclass(frozen=True)
class DisruptionModel:
    """Factored disruption distribution over all network elements.

    ``link_levels[i]`` / ``node_levels[j]`` hold the degraded capacity levels
    of link i / node j as ``(capacity, conditional_probability)`` pairs,
    ordered strictly decreasing in capacity and strictly below the undisturbed
    value.  ``link_weights`` / ``node_weights`` give the probability that the
    disturbed element is this one, conditioned on the network being disturbed.
    An element that can never be disturbed has an empty level list and weight 0.
    """

    p_dis: float
    link_levels: tuple[tuple[tuple[float, float], ...], ...]
    node_levels: tuple[tuple[tuple[float, float], ...], ...]
    link_weights: tuple[float, ...]
    node_weights: tuple[float, ...]

    @staticmethod
    def uniform(
        p_dis: float,
        link_levels: Iterable[Iterable[tuple[float, float]]],
        node_levels: Iterable[Iterable[tuple[float, float]]],
    ) -> "DisruptionModel":
        """Equal weight for every element that can be disturbed at all."""
        ll = tuple(tuple((float(c), float(p)) for c, p in lv) for lv in link_levels)
        nl = tuple(tuple((float(c), float(p)) for c, p in lv) for lv in node_levels)
        n = sum(1 for lv in ll if lv) + sum(1 for lv in nl if lv)
        w = 1.0 / n if n else 0.0
        return DisruptionModel(
            p_dis=p_dis,
            link_levels=ll,
            node_levels=nl,
            link_weights=tuple(w if lv else 0.0 for lv in ll),
            node_weights=tuple(w if lv else 0.0 for lv in nl),
        )

    def element_probability(self, kind: str, index: int) -> float:
        """Absolute probability that (kind, index) is the disturbed element."""
        w = self.link_weights[index] if kind == "link" else self.node_weights[index]
        return self.p_dis * w


@dataclass(frozen=True)
class RiskNetwork:
    """A directed vertiport network with per-element disruption distributions."""

    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    disruption: DisruptionModel

    def __post_init__(self) -> None:
        if len(self.disruption.link_levels) != len(self.links):
            raise ValidationError("disruption model must cover every link exactly once")
        if len(self.disruption.node_levels) != len(self.nodes):
            raise ValidationError("disruption model must cover every node exactly once")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_links(self) -> int:
        return len(self.links)

    def node_capacities(self) -> np.ndarray:
        return np.array([v.capacity for v in self.nodes], dtype=float)

    def link_capacities(self) -> np.ndarray:
        return np.array([e.capacity for e in self.links], dtype=float)

    def positions(self) -> np.ndarray:
        return np.array([v.position for v in self.nodes], dtype=float)


@dataclass(frozen=True)
class DemandSet:
    """Origin-destination pairs requesting travel through the network."""

    pairs: tuple[tuple[int, int], ...]

    @property
    def count(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class Scenario:
    """One momentary network: capacities realized, with its probability.

    ``disturbed`` is ``None`` for the undisturbed moment, else ``("link", i)``
    or ``("node", j)``.  ``level`` is 0 when undisturbed, otherwise the 1-based
    index into the element's degraded levels.
    """

    disturbed: Optional[tuple[str, int]]
    level: int
    probability: float
    link_caps: np.ndarray
    node_caps: np.ndarray

    def key(self) -> tuple:
        """Stable identity usable as a dict key / table row label."""
        if self.disturbed is None:
            return ("none", 0, 0)
        return (self.disturbed[0], self.disturbed[1], self.level)


@dataclass(frozen=True)
class IndicatorMatrices:
    """Incidence and demand-indicator matrices of a network + demand set.

    ``incidence`` has one column per link with -1 at the tail row and +1 at
    the head row; ``incidence_abs`` is its elementwise absolute value.
    ``dest`` marks each demand's destination row with +1, ``origin`` each
    origin row with -1.
    """

    incidence: np.ndarray
    incidence_abs: np.ndarray
    dest: np.ndarray
    origin: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.incidence.shape[0]

    @property
    def n_links(self) -> int:
        return self.incidence.shape[1]

    @property
    def n_demands(self) -> int:
        return self.dest.shape[1]


def build_incidence(network: RiskNetwork, demands: DemandSet) -> IndicatorMatrices:
    """Construct the incidence and origin/destination indicator matrices."""
    n_v, n_e = network.n_nodes, network.n_links
    E = np.zeros((n_v, n_e), dtype=float)
    for e in network.links:
        if not (0 <= e.tail < n_v) or not (0 <= e.head < n_v):
            raise ValidationError(f"link {e.id}: endpoint out of range")
        E[e.tail, e.id] = -1.0
        E[e.head, e.id] = 1.0

    n_s = demands.count
    d1 = np.zeros((n_v, n_s), dtype=float)
    d2 = np.zeros((n_v, n_s), dtype=float)
    for col, (o, d) in enumerate(demands.pairs):
        if not (0 <= o < n_v) or not (0 <= d < n_v):
            raise ValidationError(f"demand {col}: references unknown node ({o}, {d})")
        d1[d, col] = 1.0
        d2[o, col] = -1.0
    return IndicatorMatrices(incidence=E, incidence_abs=np.abs(E), dest=d1, origin=d2)


def enumerate_scenarios(network: RiskNetwork) -> list[Scenario]:
    """Expand the disruption model into all momentary networks.

    Returns the undisturbed scenario first, then one scenario per (link,
    level) in link-id order, then per (node, level) in node-id order.  The
    probabilities sum to 1; capacities of undisturbed elements are copied
    bitwise from the undisturbed vectors.
    """
    dis = network.disruption
    c_e0 = network.link_capacities()
    c_v0 = network.node_capacities()

    scenarios = [
        Scenario(
            disturbed=None,
            level=0,
            probability=1.0 - dis.p_dis,
            link_caps=c_e0.copy(),
            node_caps=c_v0.copy(),
        )
    ]
    for e in network.links:
        for k, (cap, cond_p) in enumerate(dis.link_levels[e.id], start=1):
            c_e = c_e0.copy()
            c_e[e.id] = cap
            scenarios.append(
                Scenario(
                    disturbed=("link", e.id),
                    level=k,
                    probability=dis.element_probability("link", e.id) * cond_p,
                    link_caps=c_e,
                    node_caps=c_v0.copy(),
                )
            )
    for v in network.nodes:
        for k, (cap, cond_p) in enumerate(dis.node_levels[v.id], start=1):
            c_v = c_v0.copy()
            c_v[v.id] = cap
            scenarios.append(
                Scenario(
                    disturbed=("node", v.id),
                    level=k,
                    probability=dis.element_probability("node", v.id) * cond_p,
                    link_caps=c_e0.copy(),
                    node_caps=c_v,
                )
            )

    total = sum(s.probability for s in scenarios)
    if abs(total - 1.0) > PROB_TOL:
        raise ValidationError(
            f"scenario probabilities sum to {total!r}, expected 1 within {PROB_TOL}"
        )
    return scenarios


def validate_network(
    network: RiskNetwork, demands: Optional[DemandSet] = None
) -> list[str]:
    """Check every model invariant; returns one message per violation.

    An empty report means the network (and demand set, if given) is valid.
    Messages name the offending element so CLI users can locate it.
    """
    report: list[str] = []
    dis = network.disruption

    seen_node_ids: set[int] = set()
    for idx, v in enumerate(network.nodes):
        if v.id != idx:
            report.append(f"node {v.id}: ids must be 0-based and contiguous (position {idx})")
        if v.id in seen_node_ids:
            report.append(f"node {v.id}: duplicate node id")
        seen_node_ids.add(v.id)
        if v.capacity < 0:
            report.append(f"node {v.id}: negative capacity {v.capacity}")

    seen_arcs: set[tuple[int, int]] = set()
    for idx, e in enumerate(network.links):
        if e.id != idx:
            report.append(f"link {e.id}: ids must be 0-based and contiguous (position {idx})")
        if e.tail == e.head:
            report.append(f"link {e.id}: self-loop at node {e.tail}")
        if not (0 <= e.tail < network.n_nodes and 0 <= e.head < network.n_nodes):
            report.append(f"link {e.id}: endpoint references unknown node")
        if (e.tail, e.head) in seen_arcs:
            report.append(f"link {e.id}: duplicate arc ({e.tail}, {e.head})")
        seen_arcs.add((e.tail, e.head))
        if e.capacity < 0:
            report.append(f"link {e.id}: negative capacity {e.capacity}")

    if not (0.0 <= dis.p_dis <= 1.0):
        report.append(f"disruption: p_dis {dis.p_dis} outside [0, 1]")

    def check_element(kind: str, idx: int, cap: float, levels, weight: float) -> None:
        label = f"{kind} {idx}"
        if weight < 0:
            report.append(f"{label}: negative disturbance weight {weight}")
        if levels:
            caps = [c for c, _ in levels]
            if any(c < 0 for c in caps):
                report.append(f"{label}: negative disturbed capacity")
            decreasing = all(a > b for a, b in zip(caps, caps[1:]))
            if not decreasing or (caps and caps[0] >= cap):
                report.append(f"{label}: levels not strictly decreasing below {cap}")
            mass = sum(p for _, p in levels)
            if any(p < 0 for _, p in levels):
                report.append(f"{label}: negative level probability")
            elif abs(mass - 1.0) > PROB_TOL:
                report.append(f"{label}: disruption mass mismatch (conditional sum {mass!r})")
        elif weight > 0 and dis.p_dis > 0:
            report.append(f"{label}: positive weight but no disturbed levels")

    for e in network.links:
        check_element("link", e.id, e.capacity, dis.link_levels[e.id], dis.link_weights[e.id])
    for v in network.nodes:
        check_element("node", v.id, v.capacity, dis.node_levels[v.id], dis.node_weights[v.id])

    active_weight = sum(w for w, lv in zip(dis.link_weights, dis.link_levels) if lv) + sum(
        w for w, lv in zip(dis.node_weights, dis.node_levels) if lv
    )
    if dis.p_dis > 0 and abs(active_weight - 1.0) > PROB_TOL:
        report.append(f"disruption: disruption mass mismatch (weights sum {active_weight!r})")

    if demands is not None:
        seen_pairs: set[tuple[int, int]] = set()
        for col, (o, d) in enumerate(demands.pairs):
            if o == d:
                report.append(f"demand {col}: origin equals destination ({o})")
            if not (0 <= o < network.n_nodes and 0 <= d < network.n_nodes):
                report.append(f"demand {col}: references unknown node")
            if (o, d) in seen_pairs:
                report.append(f"demand {col}: duplicate pair ({o}, {d})")
            seen_pairs.add((o, d))

    return report
