import numpy as np
import pytest

from vertiflow.errors import ValidationError
from vertiflow.network import (
    DemandSet,
    DisruptionModel,
    Link,
    Node,
    RiskNetwork,
    Scenario,
    build_incidence,
    enumerate_scenarios,
)
from vertiflow.throughput import (
    DualCertificate,
    build_throughput_lp,
    default_big_m,
    extended_throughput,
    throughput,
    verify_certificate,
)
from vertiflow.extension import extend_scenario

from conftest import EX1_ARCS, EX1_LINK_CAPS, EX1_NODE_CAPS
from oracles import path_flow_throughput


def _scenario(example1, key):
    for s in enumerate_scenarios(example1):
        if s.key() == key:
            return s
    raise KeyError(key)


def _oracle(link_caps, node_caps, demands):
    arcs = [(t, h, c) for (t, h), c in zip(EX1_ARCS, link_caps)]
    return path_flow_throughput(list(node_caps), arcs, list(demands))


def test_lp_shape_matches_matrix_formulation(example1, indicators):
    scen = _scenario(example1, ("none", 0, 0))
    lp = build_throughput_lp(scen, indicators)
    # X: 4 links x 3 demands; D1, D2: 4 nodes x 3 demands
    assert lp.n_vars == 12 + 12 + 12
    # flow conservation + link caps + node caps + balance + demand caps
    assert lp.n_rows == 12 + 4 + 4 + 3 + 24


def test_default_big_m_is_total_node_capacity(example1):
    assert default_big_m(example1.node_capacities()) == pytest.approx(50.0)


# expected values frozen from the path-flow oracle (verified live below)
ORACLE_CASES = [
    (("none", 0, 0), 16.0),
    (("node", 3, 1), 13.0),
    (("link", 2, 1), 16.0),
]


@pytest.mark.parametrize("key,expected", ORACLE_CASES)
def test_momentary_throughput_matches_path_oracle(example1, indicators, key, expected):
    scen = _scenario(example1, key)
    oracle = _oracle(scen.link_caps, scen.node_caps, ((0, 1), (0, 3), (2, 3)))
    assert oracle == pytest.approx(expected, abs=1e-9)
    res = throughput(scen, indicators, big_m=50.0)
    assert res.throughput == pytest.approx(expected, abs=1e-6)
    assert res.verified
    assert res.check.max_residual <= 1e-6


def test_flow_solution_invariants(example1, indicators):
    res = throughput(_scenario(example1, ("none", 0, 0)), indicators, big_m=50.0)
    f = res.flow
    assert np.all(f.X >= -1e-9)
    assert np.all(f.D1 >= -1e-9)
    assert np.all(f.D2 <= 1e-9)
    assert np.allclose(f.D1.sum(axis=0), -f.D2.sum(axis=0), atol=1e-9)
    assert f.throughput == pytest.approx(f.fulfilled.sum())


def test_extended_node_case(example1, indicators, topology):
    scen = _scenario(example1, ("node", 3, 1))
    ext = extend_scenario(scen, topology, np.array([2.0]))
    assert ext.node_caps.tolist() == [10.0, 15.0, 15.0, 7.0]
    # oracle: original graph with the disturbed node topped up by the backup
    oracle = _oracle(scen.link_caps, ext.node_caps, ((0, 1), (0, 3), (2, 3)))
    assert oracle == pytest.approx(15.0, abs=1e-9)
    res = extended_throughput(ext, indicators, big_m=52.0)
    assert res.throughput == pytest.approx(15.0, abs=1e-6)
    assert res.verified


def test_extended_link_case_capacities_and_value(example1, indicators, topology):
    scen = _scenario(example1, ("link", 2, 1))
    ext = extend_scenario(scen, topology, np.array([2.0]))
    assert ext.link_caps.tolist() == [8.0, 4.0, 2.0, 8.0, 2.0, 2.0, 2.0, 2.0]
    assert ext.node_caps.tolist() == [10.0, 15.0, 15.0, 10.0, 2.0]
    res = extended_throughput(ext, indicators)
    # oracle over the extended graph restricted to the rerouting links
    arcs = [(t, h, c) for (t, h), c in zip(EX1_ARCS, scen.link_caps)]
    arcs += [(1, 4, 2.0), (4, 3, 2.0)]
    oracle = path_flow_throughput([10.0, 15.0, 15.0, 10.0, 2.0], arcs,
                                  [(0, 1), (0, 3), (2, 3)])
    assert res.throughput == pytest.approx(oracle, abs=1e-6)
    assert res.verified


def test_zero_backup_equals_disturbed_original(example1, indicators, topology):
    for key in (("link", 2, 1), ("node", 3, 1)):
        scen = _scenario(example1, key)
        ext = extend_scenario(scen, topology, np.array([0.0]))
        base = throughput(scen, indicators, big_m=50.0).throughput
        assert extended_throughput(ext, indicators).throughput == pytest.approx(
            base, abs=1e-6)


def test_extension_never_hurts(example1, indicators, topology):
    for scen in enumerate_scenarios(example1):
        if scen.disturbed is None:
            continue
        base = throughput(scen, indicators, big_m=50.0).throughput
        ext = extend_scenario(scen, topology, np.array([2.0]))
        val = extended_throughput(ext, indicators).throughput
        assert val >= base - 1e-9


def test_throughput_monotone_in_level(example1, indicators):
    scenarios = enumerate_scenarios(example1)
    by_element: dict = {}
    for s in scenarios:
        if s.disturbed is not None:
            by_element.setdefault(s.disturbed, []).append(s)
    for elements in by_element.values():
        elements.sort(key=lambda s: s.level)
        values = [throughput(s, indicators, big_m=50.0).throughput for s in elements]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-9  # deeper degradation cannot raise throughput


def test_zero_demand_set_trivially_optimal(example1):
    ind = build_incidence(example1, DemandSet(pairs=()))
    scen = enumerate_scenarios(example1)[0]
    res = throughput(scen, ind)
    assert res.throughput == 0.0
    assert res.verified


def test_certificate_zeroed_duals_fail_with_gap_equal_to_value(example1, indicators):
    scen = _scenario(example1, ("none", 0, 0))
    res = throughput(scen, indicators, big_m=50.0)
    z = lambda shape: np.zeros(shape)
    n_v, n_e, n_s = 4, 4, 3
    cert = DualCertificate(U1=z((n_v, n_s)), U2=z((n_e, n_s)), U3=z((n_v, n_s)),
                           U4=z((n_v, n_s)), U5=z((n_v, n_s)), U6=z((n_v, n_s)),
                           h1=z(n_e), h2=z(n_v), h3=z(n_s))
    check = verify_certificate(res.flow, cert, indicators,
                               scen.link_caps, scen.node_caps, 50.0)
    assert not check.passed
    assert check.residuals["zero_gap"] == pytest.approx(16.0)


def test_zero_network_verifies_with_zero_certificate():
    net = RiskNetwork(
        nodes=(Node(0, (0.0, 0.0), 0.0), Node(1, (1.0, 0.0), 0.0)),
        links=(Link(0, 0, 1, 0.0),),
        disruption=DisruptionModel.uniform(0.0, [()], [(), ()]),
    )
    ind = build_incidence(net, DemandSet(pairs=((0, 1),)))
    scen = enumerate_scenarios(net)[0]
    res = throughput(scen, ind)
    assert res.throughput == 0.0
    assert res.verified
    assert res.check.residuals["zero_gap"] <= 1e-12


def test_certificate_shape_mismatch_is_an_error(example1, indicators):
    scen = _scenario(example1, ("none", 0, 0))
    res = throughput(scen, indicators, big_m=50.0)
    bad = DualCertificate(
        U1=res.certificate.U1[:2], U2=res.certificate.U2, U3=res.certificate.U3,
        U4=res.certificate.U4, U5=res.certificate.U5, U6=res.certificate.U6,
        h1=res.certificate.h1, h2=res.certificate.h2, h3=res.certificate.h3,
    )
    with pytest.raises(ValidationError):
        verify_certificate(res.flow, bad, indicators,
                           scen.link_caps, scen.node_caps, 50.0)


def _random_instance(rng):
    n_v = int(rng.integers(2, 6))
    arcs = []
    seen = set()
    for _ in range(int(rng.integers(1, 9))):
        t, h = int(rng.integers(0, n_v)), int(rng.integers(0, n_v))
        if t != h and (t, h) not in seen:
            seen.add((t, h))
            arcs.append((t, h))
    if not arcs:
        arcs = [(0, 1)]
    link_caps = [float(rng.integers(1, 9)) for _ in arcs]
    node_caps = [float(rng.integers(2, 14)) for _ in range(n_v)]
    pairs = []
    for _ in range(int(rng.integers(1, 5))):
        o, d = int(rng.integers(0, n_v)), int(rng.integers(0, n_v))
        if o != d and (o, d) not in pairs:
            pairs.append((o, d))
    if not pairs:
        pairs = [arcs[0]]
    net = RiskNetwork(
        nodes=tuple(Node(i, (float(i), 0.0), node_caps[i]) for i in range(n_v)),
        links=tuple(Link(j, t, h, link_caps[j]) for j, (t, h) in enumerate(arcs)),
        disruption=DisruptionModel.uniform(0.0, [() for _ in arcs],
                                           [() for _ in range(n_v)]),
    )
    return net, DemandSet(pairs=tuple(pairs)), arcs, link_caps, node_caps


def test_matrix_lp_equals_path_oracle_on_random_networks():
    rng = np.random.default_rng(314)
    for _ in range(40):
        net, demands, arcs, link_caps, node_caps = _random_instance(rng)
        ind = build_incidence(net, demands)
        scen = enumerate_scenarios(net)[0]
        res = throughput(scen, ind)
        oracle = path_flow_throughput(
            node_caps, [(t, h, c) for (t, h), c in zip(arcs, link_caps)],
            list(demands.pairs))
        assert res.throughput == pytest.approx(oracle, abs=1e-6)
        assert res.verified
