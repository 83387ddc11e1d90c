import numpy as np
import pytest

from vertiflow.errors import ValidationError
from vertiflow.network import (
    DemandSet,
    DisruptionModel,
    Link,
    Node,
    RiskNetwork,
    build_incidence,
    enumerate_scenarios,
    validate_network,
)

from conftest import make_example1


def test_incidence_matrix_matches_worked_example(example1, demands, indicators):
    expected = np.array([
        [-1, -1, 0, 0],
        [1, 0, -1, 0],
        [0, 1, 0, -1],
        [0, 0, 1, 1],
    ], dtype=float)
    assert np.array_equal(indicators.incidence, expected)
    assert np.array_equal(indicators.incidence_abs, np.abs(expected))


def test_destination_indicator_placement(indicators):
    d1 = indicators.dest
    assert d1[1, 0] == 1.0
    assert d1[3, 1] == 1.0 and d1[3, 2] == 1.0
    assert d1.sum() == 3.0  # one +1 per demand column
    d2 = indicators.origin
    assert d2[0, 0] == -1.0 and d2[0, 1] == -1.0 and d2[2, 2] == -1.0
    assert d2.sum() == -3.0


def test_single_link_no_demands():
    net = RiskNetwork(
        nodes=(Node(0, (0.0, 0.0), 1.0), Node(1, (1.0, 0.0), 1.0)),
        links=(Link(0, 0, 1, 1.0),),
        disruption=DisruptionModel.uniform(0.0, [()], [(), ()]),
    )
    ind = build_incidence(net, DemandSet(pairs=()))
    assert ind.incidence.tolist() == [[-1.0], [1.0]]
    assert ind.dest.shape == (2, 0)
    assert ind.origin.shape == (2, 0)


def test_incidence_rejects_unknown_demand_node(example1):
    with pytest.raises(ValidationError):
        build_incidence(example1, DemandSet(pairs=((0, 9),)))


def test_scenario_count_and_mass(example1):
    scenarios = enumerate_scenarios(example1)
    # one undisturbed moment plus one scenario per (element, degraded level):
    # 2 levels on each node, 2 on the outer links, 1 on the inner links
    assert len(scenarios) == 1 + (2 + 2 + 2 + 2) + (2 + 1 + 1 + 2)
    assert abs(sum(s.probability for s in scenarios) - 1.0) <= 1e-9
    assert sum(1 for s in scenarios if s.disturbed is None) == 1
    assert scenarios[0].probability == pytest.approx(0.2)


def test_scenario_capacity_vectors(example1):
    scenarios = enumerate_scenarios(example1)
    v4_level1 = next(s for s in scenarios if s.disturbed == ("node", 3) and s.level == 1)
    assert v4_level1.node_caps.tolist() == [10.0, 15.0, 15.0, 5.0]
    assert v4_level1.link_caps.tolist() == list(example1.link_capacities())
    assert v4_level1.probability == pytest.approx(0.05)

    for s in scenarios:
        if s.disturbed is None:
            continue
        kind, idx = s.disturbed
        if kind == "link":
            assert s.link_caps[idx] < example1.links[idx].capacity
            mask = np.arange(example1.n_links) != idx
            # untouched entries are copied bitwise, no arithmetic applied
            assert np.array_equal(s.link_caps[mask], example1.link_capacities()[mask])
            assert np.array_equal(s.node_caps, example1.node_capacities())
        else:
            assert s.node_caps[idx] < example1.nodes[idx].capacity
            mask = np.arange(example1.n_nodes) != idx
            assert np.array_equal(s.node_caps[mask], example1.node_capacities()[mask])
            assert np.array_equal(s.link_caps, example1.link_capacities())


def test_no_disruption_single_scenario():
    net = RiskNetwork(
        nodes=(Node(0, (0.0, 0.0), 1.0), Node(1, (1.0, 0.0), 1.0)),
        links=(Link(0, 0, 1, 1.0),),
        disruption=DisruptionModel(
            p_dis=0.0, link_levels=((),), node_levels=((), ()),
            link_weights=(0.0,), node_weights=(0.0, 0.0),
        ),
    )
    scenarios = enumerate_scenarios(net)
    assert len(scenarios) == 1
    assert scenarios[0].disturbed is None
    assert scenarios[0].probability == 1.0


def test_scenario_mass_mismatch_raises():
    net = make_example1()
    bad = DisruptionModel(
        p_dis=0.8,
        link_levels=net.disruption.link_levels,
        node_levels=net.disruption.node_levels,
        link_weights=(0.125, 0.0625, 0.0625, 0.125),
        node_weights=(0.125, 0.1875, 0.1875, 0.0),  # drops 0.1 of mass
    )
    with pytest.raises(ValidationError):
        enumerate_scenarios(RiskNetwork(net.nodes, net.links, bad))


def test_validate_clean_example(example1, demands):
    assert validate_network(example1, demands) == []


def test_validate_flags_non_decreasing_levels():
    net = make_example1()
    dis = net.disruption
    bad_levels = list(dis.node_levels)
    bad_levels[0] = ((5.0, 0.5), (5.0, 0.5))
    bad = DisruptionModel(
        p_dis=dis.p_dis, link_levels=dis.link_levels,
        node_levels=tuple(bad_levels),
        link_weights=dis.link_weights, node_weights=dis.node_weights,
    )
    report = validate_network(RiskNetwork(net.nodes, net.links, bad))
    assert any("node 0" in line and "strictly decreasing" in line for line in report)


def test_validate_flags_mass_mismatch():
    net = make_example1()
    dis = net.disruption
    bad_levels = list(dis.link_levels)
    bad_levels[1] = ((2.0, 0.9),)  # conditional probabilities must sum to 1
    bad = DisruptionModel(
        p_dis=0.8, link_levels=tuple(bad_levels), node_levels=dis.node_levels,
        link_weights=dis.link_weights, node_weights=dis.node_weights,
    )
    report = validate_network(RiskNetwork(net.nodes, net.links, bad))
    assert any("disruption mass mismatch" in line for line in report)


def test_validate_flags_duplicates_and_self_loops():
    net = make_example1()
    links = (Link(0, 0, 1, 8.0), Link(1, 0, 1, 4.0), Link(2, 1, 1, 4.0),
             Link(3, 2, 3, 8.0))
    report = validate_network(RiskNetwork(net.nodes, links, net.disruption))
    assert any("duplicate arc" in line for line in report)
    assert any("self-loop" in line for line in report)


def test_incidence_columns_sum_to_zero_random():
    rng = np.random.default_rng(5)
    for _ in range(25):
        n_v = int(rng.integers(2, 7))
        arcs = []
        seen = set()
        for _ in range(int(rng.integers(1, 9))):
            t, h = int(rng.integers(0, n_v)), int(rng.integers(0, n_v))
            if t != h and (t, h) not in seen:
                seen.add((t, h))
                arcs.append((t, h))
        if not arcs:
            continue
        net = RiskNetwork(
            nodes=tuple(Node(i, (float(i), 0.0), 1.0) for i in range(n_v)),
            links=tuple(Link(j, t, h, 1.0) for j, (t, h) in enumerate(arcs)),
            disruption=DisruptionModel.uniform(
                0.0, [() for _ in arcs], [() for _ in range(n_v)]
            ),
        )
        ind = build_incidence(net, DemandSet(pairs=()))
        sums = ind.incidence.sum(axis=0)
        assert np.array_equal(sums, np.zeros(len(arcs)))
        assert np.all(np.abs(ind.incidence).sum(axis=0) == 2)
