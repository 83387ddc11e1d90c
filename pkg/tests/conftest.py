"""Shared fixtures: the 4-node worked example, its reserve extension, helpers."""

from __future__ import annotations

import numpy as np
import pytest

from vertiflow.design import DesignSpec
from vertiflow.extension import BackupPolicy, CandidateSet, build_backup_topology
from vertiflow.network import (
    DemandSet,
    DisruptionModel,
    Link,
    Node,
    RiskNetwork,
    build_incidence,
)

# Node/link capacities and per-element disturbance distributions of the
# 4-node, 4-link worked example: two parallel two-hop corridors between a
# source and a sink, three O-D pairs, every element individually degradable.
EX1_NODE_CAPS = (10.0, 15.0, 15.0, 10.0)
EX1_LINK_CAPS = (8.0, 4.0, 4.0, 8.0)
EX1_POSITIONS = ((0.0, 0.0), (4.0, 2.0), (4.0, -2.0), (8.0, 0.0))
EX1_ARCS = ((0, 1), (0, 2), (1, 3), (2, 3))
EX1_DEMANDS = ((0, 1), (0, 3), (2, 3))

# absolute level probabilities: links 0/3 -> 0.05+0.05, 1/2 -> 0.05,
# nodes 0/3 -> 0.05+0.05, 1/2 -> 0.10+0.05; total disturbed mass 0.8
EX1_P_DIS = 0.8
EX1_LINK_LEVELS = (
    ((4.0, 0.5), (0.0, 0.5)),
    ((2.0, 1.0),),
    ((2.0, 1.0),),
    ((4.0, 0.5), (0.0, 0.5)),
)
EX1_NODE_LEVELS = (
    ((5.0, 0.5), (0.0, 0.5)),
    ((10.0, 2.0 / 3.0), (5.0, 1.0 / 3.0)),
    ((10.0, 2.0 / 3.0), (5.0, 1.0 / 3.0)),
    ((5.0, 0.5), (0.0, 0.5)),
)
EX1_LINK_WEIGHTS = (0.125, 0.0625, 0.0625, 0.125)
EX1_NODE_WEIGHTS = (0.125, 0.1875, 0.1875, 0.125)

# candidate backup site qualifying as a single-stop detour for link 2 only
EX2_CANDIDATE_POS = (6.0, 2.2)
EX2_CAP_LEVELS = (0.0, 1.0, 2.0)
EX2_COSTS = (0.0, 4.0, 6.0)


def make_example1() -> RiskNetwork:
    nodes = tuple(
        Node(id=i, position=EX1_POSITIONS[i], capacity=EX1_NODE_CAPS[i])
        for i in range(4)
    )
    links = tuple(
        Link(id=j, tail=t, head=h, capacity=EX1_LINK_CAPS[j])
        for j, (t, h) in enumerate(EX1_ARCS)
    )
    disruption = DisruptionModel(
        p_dis=EX1_P_DIS,
        link_levels=EX1_LINK_LEVELS,
        node_levels=EX1_NODE_LEVELS,
        link_weights=EX1_LINK_WEIGHTS,
        node_weights=EX1_NODE_WEIGHTS,
    )
    return RiskNetwork(nodes=nodes, links=links, disruption=disruption)


def make_reduced_example1() -> RiskNetwork:
    """Same graph with only node 3 and link 2 degradable (design-test size)."""
    base = make_example1()
    disruption = DisruptionModel(
        p_dis=0.3,
        link_levels=((), (), ((2.0, 1.0),), ()),
        node_levels=((), (), (), ((5.0, 1.0),)),
        link_weights=(0.0, 0.0, 0.5, 0.0),
        node_weights=(0.0, 0.0, 0.0, 0.5),
    )
    return RiskNetwork(nodes=base.nodes, links=base.links, disruption=disruption)


def make_candidates() -> CandidateSet:
    return CandidateSet(
        ids=(4,),
        positions=(EX2_CANDIDATE_POS,),
        cap_levels=np.array([EX2_CAP_LEVELS]),
        costs=np.array([EX2_COSTS]),
    )


@pytest.fixture(scope="session")
def example1():
    return make_example1()


@pytest.fixture(scope="session")
def demands():
    return DemandSet(pairs=EX1_DEMANDS)


@pytest.fixture(scope="session")
def indicators(example1, demands):
    return build_incidence(example1, demands)


@pytest.fixture(scope="session")
def policy(example1):
    return BackupPolicy.with_default_radius(example1)


@pytest.fixture(scope="session")
def topology(example1, policy):
    return build_backup_topology(example1, make_candidates(), policy)


@pytest.fixture(scope="session")
def reduced_spec():
    """Example-2 design spec over the reduced two-scenario disruption model."""
    network = make_reduced_example1()
    dem = DemandSet(pairs=EX1_DEMANDS)
    cands = make_candidates()
    pol = BackupPolicy.with_default_radius(network)
    topo = build_backup_topology(network, cands, pol)
    return DesignSpec(
        network=network, demands=dem, candidates=cands, topology=topo,
        budget=10.0, valuation=0.01,
    )


@pytest.fixture(scope="session")
def full_spec(example1, topology):
    return DesignSpec(
        network=example1, demands=DemandSet(pairs=EX1_DEMANDS),
        candidates=topology.candidates, topology=topology,
        budget=10.0, valuation=0.01,
    )
