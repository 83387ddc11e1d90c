"""Backup candidates, detour qualification, and extended-network construction.

Backup vertiports join the network in two ways.  When a link is disturbed, a
candidate within the detour-ratio window of that link provides a single-stop
alternative path via two directed backup links; the extended incidence keeps
columns only for those rerouting links.  When a node is disturbed, every
backup node adjacent to it (connected by any backup link) simply tops up the
node's capacity, so the extension reuses the original incidence.

Backup links exist in both directions and inherit the capacity of the one
backup node they touch; backup elements are never disturbed themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError
from .network import IndicatorMatrices, Link, RiskNetwork, Scenario


@dataclass(frozen=True)
class CandidateSet:
    """Candidate backup locations with buildable capacity levels and costs.

    ``ids`` continue the original node indexing.  Row ``i`` of ``cap_levels``
    lists candidate i's selectable capacities starting at 0 (build nothing),
    strictly increasing; ``costs`` holds the matching construction costs,
    zero for the null level and positive otherwise.
    """

    ids: tuple[int, ...]
    positions: tuple[tuple[float, float], ...]
    cap_levels: np.ndarray
    costs: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.ids)
        if self.cap_levels.shape != self.costs.shape or self.cap_levels.shape[0] != n:
            raise ValidationError("capacity level and cost matrices must be N_candidates x K")
        if self.cap_levels.shape[1] < 2:
            raise ValidationError("need at least the null level plus one buildable level")
        for i in range(n):
            row = self.cap_levels[i]
            if row[0] != 0.0:
                raise ValidationError(f"candidate {self.ids[i]}: first capacity level must be 0")
            if not np.all(np.diff(row) > 0):
                raise ValidationError(f"candidate {self.ids[i]}: levels must be strictly increasing")
            if self.costs[i, 0] != 0.0 or np.any(self.costs[i, 1:] <= 0):
                raise ValidationError(f"candidate {self.ids[i]}: costs must be 0 then positive")

    @property
    def count(self) -> int:
        return len(self.ids)

    @property
    def n_levels(self) -> int:
        return int(self.cap_levels.shape[1])


@dataclass(frozen=True)
class BackupPolicy:
    """Geometric rules for connecting candidates to the network.

    A candidate qualifies as a detour for a link when the relative detour
    length sits in ``[ratio_min, ratio_max]``; below the window the candidate
    is too close to the link to be a meaningful alternative, above it the
    extra distance is too long.  ``rho_adj_km`` is the radius within which a
    candidate additionally connects to an original node as a plain landing
    alternative.
    """

    ratio_min: float = 1.02
    ratio_max: float = 1.5
    rho_adj_km: float = 1.0

    def __post_init__(self) -> None:
        if not (1.0 < self.ratio_min <= self.ratio_max):
            raise ValidationError("need 1 < ratio_min <= ratio_max")
        if self.rho_adj_km <= 0:
            raise ValidationError("adjacency radius must be positive")

    @staticmethod
    def with_default_radius(
        network: RiskNetwork, ratio_min: float = 1.02, ratio_max: float = 1.5
    ) -> "BackupPolicy":
        """Adjacency radius defaulting to 40% of the mean original link length."""
        pos = network.positions()
        lengths = [
            float(np.linalg.norm(pos[e.head] - pos[e.tail])) for e in network.links
        ]
        rho = 0.4 * (sum(lengths) / len(lengths)) if lengths else 1.0
        return BackupPolicy(ratio_min=ratio_min, ratio_max=ratio_max, rho_adj_km=rho)


def qualify_detour(
    tail_pos: tuple[float, float],
    head_pos: tuple[float, float],
    candidate_pos: tuple[float, float],
    policy: BackupPolicy,
) -> tuple[bool, float]:
    """Detour ratio test: (d(tail, c) + d(c, head)) / d(tail, head)."""
    t = np.asarray(tail_pos, dtype=float)
    h = np.asarray(head_pos, dtype=float)
    c = np.asarray(candidate_pos, dtype=float)
    base = float(np.linalg.norm(h - t))
    if base <= 0.0:
        raise ValidationError("detour ratio undefined for a zero-length link")
    r = (float(np.linalg.norm(c - t)) + float(np.linalg.norm(h - c))) / base
    return (policy.ratio_min <= r <= policy.ratio_max, r)


@dataclass(frozen=True)
class BackupTopology:
    """All backup links induced by a candidate set under a policy.

    ``backup_links`` continue the original link indexing; their endpoints use
    global node ids (original nodes, then candidates in order).  ``detours``
    maps each original link id to the candidate indices qualified to reroute
    it.  ``delta_adj`` marks which (original node, candidate) pairs are joined
    by a backup link.  Candidates connected to nothing are listed in
    ``excluded`` and can never be built.
    """

    network: RiskNetwork
    candidates: CandidateSet
    backup_links: tuple[Link, ...]
    detours: dict[int, tuple[int, ...]]
    delta_adj: np.ndarray
    excluded: tuple[int, ...]
    warnings: tuple[str, ...]

    @property
    def n_candidates(self) -> int:
        return self.candidates.count

    @property
    def n_backup_links(self) -> int:
        return len(self.backup_links)

    def backup_node_of(self, link: Link) -> int:
        """Candidate index (0-based) of the backup endpoint of a backup link."""
        n_v = self.network.n_nodes
        return (link.head if link.head >= n_v else link.tail) - n_v

    def backup_link_capacities(self, backup_caps: np.ndarray) -> np.ndarray:
        """Each backup link inherits the capacity of its backup node."""
        return np.array(
            [backup_caps[self.backup_node_of(e)] for e in self.backup_links], dtype=float
        )


def build_backup_topology(
    network: RiskNetwork, candidates: CandidateSet, policy: BackupPolicy
) -> BackupTopology:
    """Generate backup links: detour pairs for qualified (link, candidate)
    combinations plus adjacency links within the policy radius."""
    n_v = network.n_nodes
    pos = network.positions()
    expected_ids = tuple(range(n_v, n_v + candidates.count))
    if candidates.ids != expected_ids:
        raise ValidationError(
            f"candidate ids must continue node indexing: expected {expected_ids}"
        )

    arcs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()

    def add(tail: int, head: int) -> None:
        if (tail, head) not in seen:
            seen.add((tail, head))
            arcs.append((tail, head))

    detours: dict[int, tuple[int, ...]] = {}
    for e in network.links:
        qualified = []
        for ci in range(candidates.count):
            ok, _ = qualify_detour(
                tuple(pos[e.tail]), tuple(pos[e.head]), candidates.positions[ci], policy
            )
            if ok:
                qualified.append(ci)
                c_global = n_v + ci
                add(e.tail, c_global)
                add(c_global, e.tail)
                add(c_global, e.head)
                add(e.head, c_global)
        detours[e.id] = tuple(qualified)

    for ci in range(candidates.count):
        c_global = n_v + ci
        for v in range(n_v):
            d = float(np.linalg.norm(pos[v] - np.asarray(candidates.positions[ci])))
            if d <= policy.rho_adj_km:
                add(v, c_global)
                add(c_global, v)

    excluded = []
    warnings = []
    connected = {t for t, _ in arcs} | {h for _, h in arcs}
    for ci in range(candidates.count):
        if n_v + ci not in connected:
            excluded.append(ci)
            warnings.append(
                f"candidate {n_v + ci}: no adjacency within {policy.rho_adj_km:g} km and "
                "no qualified detour; excluded from selection"
            )

    n_e = network.n_links
    backup_links = tuple(
        Link(id=n_e + t, tail=tail, head=head, capacity=0.0)
        for t, (tail, head) in enumerate(arcs)
    )

    delta_adj = np.zeros((n_v, candidates.count))
    for tail, head in arcs:
        if tail < n_v <= head:
            delta_adj[tail, head - n_v] = 1.0
        elif head < n_v <= tail:
            delta_adj[head, tail - n_v] = 1.0

    return BackupTopology(
        network=network,
        candidates=candidates,
        backup_links=backup_links,
        detours=detours,
        delta_adj=delta_adj,
        excluded=tuple(excluded),
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class ExtendedScenario:
    """A disturbed moment augmented with the built reserve capacity.

    ``case`` is ``"link"``, ``"node"``, or ``"none"``.  For the link case,
    ``incidence`` is the extended incidence whose backup columns are nonzero
    only for the rerouting links of candidates qualified for the disturbed
    link, and the capacity vectors cover original plus backup elements.  For
    the node case the original shapes are kept and only the disturbed node's
    capacity is topped up.  The undisturbed case passes through unchanged.
    """

    scenario: Scenario
    case: str
    link_caps: np.ndarray
    node_caps: np.ndarray
    n_backup_nodes: int = 0
    incidence: Optional[np.ndarray] = None

    def extended_indicators(self, base: IndicatorMatrices) -> IndicatorMatrices:
        if self.case != "link":
            return base
        pad = np.zeros((self.n_backup_nodes, base.n_demands))
        return IndicatorMatrices(
            incidence=self.incidence,
            incidence_abs=np.abs(self.incidence),
            dest=np.vstack([base.dest, pad]),
            origin=np.vstack([base.origin, pad]),
        )


def extend_scenario(
    scenario: Scenario,
    topology: BackupTopology,
    backup_caps: np.ndarray,
) -> ExtendedScenario:
    """Attach reserve capacity to a momentary network per its disturbance case."""
    network = topology.network
    n_v, n_e = network.n_nodes, network.n_links
    backup_caps = np.asarray(backup_caps, dtype=float)
    if backup_caps.shape != (topology.n_candidates,):
        raise ValidationError(
            f"backup capacity vector must have length {topology.n_candidates}"
        )
    if np.any(backup_caps < 0):
        raise ValidationError("backup capacities must be nonnegative")
    if scenario.link_caps.shape != (n_e,) or scenario.node_caps.shape != (n_v,):
        raise ValidationError("scenario does not match the topology's network")

    if scenario.disturbed is None:
        return ExtendedScenario(
            scenario=scenario, case="none",
            link_caps=scenario.link_caps, node_caps=scenario.node_caps,
        )

    kind, idx = scenario.disturbed
    if kind == "node":
        unit = np.zeros(n_v)
        unit[idx] = 1.0
        extra = unit * (topology.delta_adj @ backup_caps)
        return ExtendedScenario(
            scenario=scenario, case="node",
            link_caps=scenario.link_caps,
            node_caps=scenario.node_caps + extra,
        )

    # link case: extended incidence with rerouting columns for qualified
    # candidates of the disturbed link only
    disturbed = network.links[idx]
    qualified = set(topology.detours[idx])
    n_eb = topology.n_backup_links
    n_vb = topology.n_candidates
    E_ext = np.zeros((n_v + n_vb, n_e + n_eb))
    for e in network.links:
        E_ext[e.tail, e.id] = -1.0
        E_ext[e.head, e.id] = 1.0
    for e in topology.backup_links:
        ci = topology.backup_node_of(e)
        if ci not in qualified:
            continue
        reroutes = (
            e.tail == disturbed.tail and e.head == n_v + ci
        ) or (
            e.head == disturbed.head and e.tail == n_v + ci
        )
        if reroutes:
            E_ext[e.tail, e.id] = -1.0
            E_ext[e.head, e.id] = 1.0

    link_caps = np.concatenate([scenario.link_caps,
                                topology.backup_link_capacities(backup_caps)])
    node_caps = np.concatenate([scenario.node_caps, backup_caps])
    return ExtendedScenario(
        scenario=scenario, case="link",
        link_caps=link_caps, node_caps=node_caps,
        n_backup_nodes=n_vb, incidence=E_ext,
    )
