import math

import numpy as np
import pytest
from hypothesis import example, given, strategies as st

from helpers import has_demand, scenarios, single_cell
from oracles import dual_root, dual_value, enumerate_plans
from legrm import ConvergenceError, InfeasibleError, NoDemandError
from legrm.demand import LN2, curve_arrays
from legrm.relaxed import DEFAULT_TOL, dual_gradient, dual_objective, relaxed_bound, solve_dual, solve_relaxed
from legrm.scenario import GeneratorSpec, generate_synthetic, make_scenario

A, B = np.array([200.0]), np.array([LN2 / 100.0])


def test_dual_objective_closed_form():
    # (alpha / beta) / e for the single cell, with mu = 0
    assert dual_objective(A, B, 180.0, 0.0) == pytest.approx(200.0 / (LN2 / 100.0) / math.e, rel=1e-14)
    assert dual_objective(A, B, 180.0, 0.0) == pytest.approx(10614.757, abs=1e-3)


def test_dual_objective_no_cells_is_linear():
    assert dual_objective([], [], 40.0, 2.5) == 100.0


def test_gradient_values():
    assert dual_gradient(A, B, 180.0, 0.0) == pytest.approx(180.0 - 200.0 / math.e, rel=1e-14)
    assert dual_gradient(A, B, 180.0, 0.0) == pytest.approx(106.42, abs=0.01)
    assert abs(dual_gradient(A, B, 180.0, 1e6) - 180.0) <= 1e-9


@given(st.floats(0.0, 500.0), st.floats(0.0, 500.0), st.floats(1.0, 300.0))
def test_dual_convex(a, b, cap):
    f = lambda m: dual_objective(A, B, cap, m)
    assert f(0.5 * (a + b)) <= 0.5 * (f(a) + f(b)) + 1e-9 * abs(f(a) + f(b))


@given(st.floats(1e-3, 400.0), st.floats(1.0, 300.0))
def test_gradient_finite_difference(mu, cap):
    h = 1e-4
    fd = (dual_objective(A, B, cap, mu + h) - dual_objective(A, B, cap, mu - h)) / (2 * h)
    assert abs(fd - dual_gradient(A, B, cap, mu)) <= 1e-6


def test_unconstrained_single_cell():
    sol = solve_dual(A, B, 180.0)
    assert sol.mu_star == 0.0
    assert sol.prices[0] == pytest.approx(144.2695, abs=1e-4)
    assert sol.bound == pytest.approx(10614.757, abs=1e-3)


def test_active_single_cell():
    sol = solve_dual(A, B, 50.0)
    assert sol.prices[0] == pytest.approx(200.0, rel=1e-10)
    assert sol.mu_star == pytest.approx(200.0 - 100.0 / LN2, rel=1e-10)
    assert sol.mu_star == pytest.approx(55.73, abs=0.01)
    assert sol.bound == pytest.approx(10000.0, rel=1e-10)
    assert sol.primal_demand == pytest.approx(50.0, rel=1e-10)


def test_two_identical_cells_symmetry():
    one = solve_dual(A, B, 50.0)
    two = solve_dual(np.repeat(A, 2), np.repeat(B, 2), 100.0)
    assert two.mu_star == pytest.approx(one.mu_star, rel=1e-12)
    assert np.allclose(two.prices, one.prices[0], rtol=1e-12)


def test_errors():
    with pytest.raises(NoDemandError):
        solve_dual([0.0, 0.0], [1.0, 1.0], 10.0)
    with pytest.raises(InfeasibleError):
        solve_dual(A, B, 0.0)
    with pytest.raises(ConvergenceError):
        solve_dual([200.0, 1e6], [0.0069, 0.5], 1e-3, max_iter=2)


@given(scenarios(max_products=3, max_horizon=5, max_prices=3))
@example(make_scenario(77, [("P0", [50.0], [0.0, 0.0, 0.0, 36.0], [2.0] * 4),
                            ("P1", [50.0], [0.0, 0.0, 2.0, 50.0], [2.0, 2.0, 2.0, 3.0]),
                            ("P2", [50.0], [0.0, 0.0, 9.0, 37.0], [2.0, 2.0, 2.0, 3.0])]))
def test_against_root_finding_oracle(s):
    if not has_demand(s):
        return
    alpha, beta = curve_arrays(s)
    live = alpha > 0
    mu = dual_root(alpha[live], beta[live], s.capacity)
    sol = solve_relaxed(s)
    # the solver stops at |f'(mu)| <= tol*C, which moves mu by at most tol*C / f''(mu)
    a, b = alpha[live], beta[live]
    grad = s.capacity - float(np.sum(a * np.exp(-b * sol.mu_star - 1.0)))
    if mu > 0:
        assert abs(grad) <= DEFAULT_TOL * s.capacity
        curvature = float(np.sum(b * a * np.exp(-b * mu - 1.0)))
        assert abs(sol.mu_star - mu) <= 2 * DEFAULT_TOL * s.capacity / curvature + 1e-12 * mu
    else:
        assert sol.mu_star == 0.0 and grad >= 0
    assert sol.bound == pytest.approx(dual_value(alpha[live], beta[live], s.capacity, mu), rel=1e-9)
    assert np.allclose(sol.prices[live], sol.mu_star + 1.0 / beta[live], rtol=1e-12)
    # zero-demand cells sit at their ladder top
    top = np.broadcast_to(s.max_prices()[:, None], alpha.shape)
    assert np.array_equal(sol.prices[~live], top[~live])


@given(scenarios(max_products=2, max_horizon=3, max_prices=3))
def test_bound_dominates_every_feasible_plan(s):
    if not has_demand(s):
        return
    best = enumerate_plans(s)
    if best is not None:
        assert relaxed_bound(s) >= best - 1e-9 * best


@given(scenarios(max_products=2, max_horizon=3), st.integers(1, 200), st.integers(1, 200))
def test_bound_monotone_in_capacity(s, c1, c2):
    if not has_demand(s):
        return
    lo, hi = sorted((c1, c2))
    assert relaxed_bound(s, lo) <= relaxed_bound(s, hi) * (1 + 1e-12)


def test_relaxed_bound_examples():
    s = single_cell(50)
    assert relaxed_bound(s) == pytest.approx(10000.0, rel=1e-10)
    # everything fixed: plain revenue of the plan
    assert relaxed_bound(s, fixed={(0, 0): 300.0}) == pytest.approx(300.0 * 25.0, rel=1e-12)
    with pytest.raises(InfeasibleError):
        relaxed_bound(s, fixed={(0, 0): 100.0})


def test_relaxed_bound_with_partial_assignment():
    s = generate_synthetic(GeneratorSpec(n_products=2, horizon=3), 5)
    alpha, beta = curve_arrays(s)
    p = 600.0
    q = alpha[0, 2] * math.exp(-beta[0, 2] * p)
    rest = np.ones(alpha.shape, bool)
    rest[0, 2] = False
    mu = dual_root(alpha[rest], beta[rest], s.capacity - q)
    expected = p * q + dual_value(alpha[rest], beta[rest], s.capacity - q, mu)
    assert relaxed_bound(s, fixed={(0, 2): p}) == pytest.approx(expected, rel=1e-9)


def test_start_time_drops_past_cells():
    s = generate_synthetic(GeneratorSpec(horizon=6), 2)
    sol = solve_relaxed(s, start_time=2)
    assert np.isnan(sol.prices[:, 3:]).all() and not np.isnan(sol.prices[:, :3]).any()
    alpha, beta = curve_arrays(s)
    mu = dual_root(alpha[:, :3].ravel(), beta[:, :3].ravel(), s.capacity)
    assert sol.mu_star == pytest.approx(mu, rel=1e-8, abs=1e-8)


def test_kkt_residuals_small():
    s = generate_synthetic(GeneratorSpec(demand_range=(4.0, 8.0)), 9)
    k = solve_relaxed(s).kkt
    assert k.gradient <= 1e-9 * s.capacity
    assert abs(k.complementary_slackness) <= 1e-6 * s.capacity
    assert abs(k.duality_gap) <= 1e-6 * solve_relaxed(s).bound
