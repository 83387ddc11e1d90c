import math

import numpy as np
import pytest

from vertiflow.lp import LpModel, MipModel, SolverConfig, solve_lp, solve_mip

from oracles import enumerate_mip_best


def knapsack(values, costs, cap):
    m = LpModel()
    for v in values:
        m.add_var(obj=float(v), lower=0.0, upper=1.0)
    m.add_row([(j, float(c)) for j, c in enumerate(costs)], "<=", float(cap))
    return MipModel(m, frozenset(range(len(values))))


def test_unit_knapsack():
    s = solve_mip(knapsack([3.0, 2.0], [1.0, 1.0], 1.0))
    assert s.status == "optimal"
    assert s.x[0] == 1.0 and s.x[1] == 0.0
    assert s.objective == pytest.approx(3.0)


def test_four_item_knapsack_matches_enumeration():
    values = [7.0, 4.0, 5.0, 2.0]
    costs = [3.0, 2.0, 4.0, 1.0]
    mip = knapsack(values, costs, 6.0)
    got = solve_mip(mip)
    best = enumerate_mip_best(mip.lp, mip.binaries, solve_lp)
    assert got.objective == pytest.approx(best, abs=1e-6)


def test_zero_objective_still_optimal():
    m = LpModel()
    for _ in range(3):
        m.add_var(obj=0.0, lower=0.0, upper=1.0)
    m.add_row([(0, 1.0), (1, 1.0), (2, 1.0)], ">=", 1.5)
    s = solve_mip(MipModel(m, frozenset(range(3))))
    assert s.status == "optimal"
    assert s.objective == pytest.approx(0.0)
    assert all(v in (0.0, 1.0) for v in s.x)


def test_infeasible_mip():
    m = LpModel()
    m.add_var(obj=1.0, lower=0.0, upper=1.0)
    m.add_row([(0, 1.0)], ">=", 2.0)
    assert solve_mip(MipModel(m, frozenset({0}))).status == "infeasible"


def test_node_limit_flags_result():
    values = [5.0, 4.0, 3.0, 2.0, 1.0]
    mip = knapsack(values, [2.0, 2.0, 2.0, 2.0, 2.0], 5.0)
    s = solve_mip(mip, SolverConfig(node_limit=1))
    assert s.status == "node_limit"
    if s.bound is not None and not math.isnan(s.objective):
        assert s.bound >= s.objective - 1e-9


def _random_mip(rng):
    nb = int(rng.integers(1, 8))
    nc = int(rng.integers(0, 4))
    m = LpModel()
    for _ in range(nb):
        m.add_var(obj=float(rng.integers(-5, 6)), lower=0.0, upper=1.0)
    for _ in range(nc):
        m.add_var(obj=float(rng.integers(-3, 4)), lower=0.0,
                  upper=float(rng.integers(1, 4)))
    for _ in range(int(rng.integers(1, 5))):
        coeffs = [(j, float(rng.integers(-3, 4))) for j in range(nb + nc)
                  if rng.random() < 0.8]
        m.add_row(coeffs, ["<=", ">="][rng.integers(0, 2)], float(rng.integers(0, 8)))
    return MipModel(m, frozenset(range(nb)))


def test_random_mips_match_enumeration_oracle():
    rng = np.random.default_rng(99)
    for _ in range(60):
        mip = _random_mip(rng)
        got = solve_mip(mip)
        best = enumerate_mip_best(mip.lp, mip.binaries, solve_lp)
        if got.status == "optimal":
            assert got.objective == pytest.approx(best, abs=1e-6)
            assert all(v in (0.0, 1.0) for v in got.x[list(mip.binaries)])
        else:
            assert best == -math.inf


def test_mip_determinism():
    rng = np.random.default_rng(4)
    mip = _random_mip(rng)
    a = solve_mip(mip)
    b = solve_mip(mip)
    if a.status == "optimal":
        assert np.array_equal(a.x, b.x)
        assert a.objective == b.objective
        assert a.nodes == b.nodes
