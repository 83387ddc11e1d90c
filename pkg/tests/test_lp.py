import math

import numpy as np
import pytest

from vertiflow.errors import SimplexStalledError
from vertiflow.lp import LpModel, SolverConfig, format_lp_text, solve_lp
from vertiflow.lp.scipy_engine import solve_lp_scipy


def build(obj, rows, bounds=None):
    m = LpModel()
    for j, c in enumerate(obj):
        lo, hi = bounds[j] if bounds else (0.0, math.inf)
        m.add_var(obj=c, lower=lo, upper=hi)
    for coeffs, rel, rhs in rows:
        m.add_row(coeffs, rel, rhs)
    return m


def test_single_constraint():
    s = solve_lp(build([1.0], [([(0, 1.0)], "<=", 3.0)]))
    assert s.status == "optimal"
    assert s.x[0] == pytest.approx(3.0)
    assert s.dual[0] == pytest.approx(1.0)


def test_two_rows_hand_enumerated():
    # vertices of {x+y<=1, x<=0.4, x,y>=0}: best objective 1 with duals (1, 0)
    s = solve_lp(build([1.0, 1.0],
                       [([(0, 1.0), (1, 1.0)], "<=", 1.0), ([(0, 1.0)], "<=", 0.4)]))
    assert s.status == "optimal"
    assert s.objective == pytest.approx(1.0)
    assert s.dual.tolist() == pytest.approx([1.0, 0.0])


def test_infeasible():
    s = solve_lp(build([1.0], [([(0, 1.0)], "<=", -1.0)]))
    assert s.status == "infeasible"


def test_unbounded():
    s = solve_lp(build([1.0], [([(0, 1.0)], ">=", 1.0)]))
    assert s.status == "unbounded"


def test_no_rows_and_no_vars():
    s = solve_lp(build([], []))
    assert s.status == "optimal" and s.objective == 0.0
    s = solve_lp(build([-2.0], []))
    assert s.status == "optimal" and s.x[0] == 0.0


def test_zero_variable_model_with_rows():
    m = LpModel()
    m.add_row([], "<=", 5.0)
    s = solve_lp(m)
    assert s.status == "optimal" and s.objective == 0.0
    m = LpModel()
    m.add_row([], "<=", -5.0)
    assert solve_lp(m).status == "infeasible"


def test_iteration_limit_raises_stalled():
    m = build([1.0, 1.0], [([(0, 1.0), (1, 2.0)], "<=", 4.0),
                           ([(0, 3.0), (1, 1.0)], "<=", 6.0)])
    with pytest.raises(SimplexStalledError):
        solve_lp(m, SolverConfig(iteration_limit=0))


def test_determinism_bitwise():
    rng = np.random.default_rng(11)
    m = LpModel()
    for j in range(12):
        m.add_var(obj=float(rng.integers(-5, 6)))
    for i in range(10):
        coeffs = [(j, float(rng.integers(-3, 4))) for j in range(12) if rng.random() < 0.6]
        m.add_row(coeffs, "<=", float(rng.integers(1, 10)))
    a, b = solve_lp(m), solve_lp(m)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.dual, b.dual)
    assert a.objective == b.objective


def _random_model(rng):
    n = int(rng.integers(1, 10))
    m_rows = int(rng.integers(1, 10))
    mod = LpModel()
    for _ in range(n):
        kind = rng.integers(0, 4)
        if kind == 0:
            lo, hi = 0.0, math.inf
        elif kind == 1:
            lo, hi = -math.inf, 0.0
        elif kind == 2:
            lo, hi = 0.0, float(rng.integers(1, 5))
        else:
            lo, hi = -math.inf, math.inf
        mod.add_var(obj=float(rng.integers(-5, 6)), lower=lo, upper=hi)
    for _ in range(m_rows):
        coeffs = [(j, float(rng.integers(-4, 5))) for j in range(n) if rng.random() < 0.7]
        mod.add_row(coeffs, ["<=", ">=", "=="][rng.integers(0, 3)],
                    float(rng.integers(-6, 7)))
    return mod


def test_random_lps_match_external_solver():
    rng = np.random.default_rng(2024)
    for _ in range(150):
        mod = _random_model(rng)
        mine = solve_lp(mod)
        ref = solve_lp_scipy(mod)
        assert mine.status == ref.status
        if mine.status == "optimal":
            scale = max(1.0, abs(ref.objective))
            assert abs(mine.objective - ref.objective) <= 1e-6 * scale


def test_optimal_solutions_satisfy_kkt_residuals():
    rng = np.random.default_rng(77)
    checked = 0
    while checked < 60:
        mod = _random_model(rng)
        s = solve_lp(mod)
        if s.status != "optimal":
            continue
        checked += 1
        act = mod.row_activity(s.x)
        for i, rel in enumerate(mod.relations):
            if rel == "<=":
                assert act[i] <= mod.rhs[i] + 1e-7
                assert s.dual[i] >= -1e-7
                # complementary slackness
                assert abs(s.dual[i] * (mod.rhs[i] - act[i])) <= 1e-6 * max(
                    1.0, abs(s.dual[i]), abs(mod.rhs[i] - act[i]))
            elif rel == ">=":
                assert act[i] >= mod.rhs[i] - 1e-7
                assert s.dual[i] <= 1e-7
            else:
                assert abs(act[i] - mod.rhs[i]) <= 1e-7
        for j in range(mod.n_vars):
            lo, hi = mod.lower[j], mod.upper[j]
            assert s.x[j] >= lo - 1e-7 and s.x[j] <= hi + 1e-7
            d = s.reduced_costs[j]
            interior = s.x[j] > lo + 1e-7 and s.x[j] < hi - 1e-7
            if interior:
                assert abs(d) <= 1e-6
        assert abs(s.objective - s.dual_objective) <= 1e-6 * max(1.0, abs(s.objective))


def test_lp_text_dump():
    m = build([3.0, -2.0], [([(0, 1.0), (1, 1.0)], "<=", 1.0)],
              bounds=[(0.0, math.inf), (-math.inf, 0.0)])
    text = format_lp_text(m)
    assert text.splitlines()[0].startswith("max:")
    assert "<=" in text
    assert "-inf <= x1 <= 0" in text
