"""Continuous-price relaxation solved through its one-dimensional dual.

With prices free, the Lagrangian is maximized cell by cell at
``p = mu + 1/beta``, which leaves the convex dual

    f(mu) = mu * C + sum(alpha / beta * exp(-beta * mu - 1)),   mu >= 0.

Its minimizer is the shadow price of a seat.  There is no duality gap, so
``f(mu*)`` is both the optimal relaxed revenue and an upper bound for every
discrete price plan.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .demand import curve_arrays
from .errors import ConvergenceError, InfeasibleError, NoDemandError
from .scenario import Scenario

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class KKTResiduals:
    gradient: float  # |f'(mu*)|, zero when the capacity binds
    capacity_slack: float  # C - sum of demands at p*
    complementary_slackness: float  # mu* * f'(mu*)
    duality_gap: float  # f(mu*) - revenue at p*


@dataclass(frozen=True)
class DualSolution:
    mu_star: float
    prices: np.ndarray
    bound: float
    newton_iterations: int
    kkt: KKTResiduals
    primal_revenue: float
    primal_demand: float


def dual_objective(alpha, beta, capacity: float, mu: float) -> float:
    alpha = np.asarray(alpha, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    live = alpha > 0
    return float(mu * capacity + np.sum(alpha[live] / beta[live] * np.exp(-beta[live] * mu - 1.0)))


def dual_gradient(alpha, beta, capacity: float, mu: float) -> float:
    alpha = np.asarray(alpha, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    return float(capacity - np.sum(alpha * np.exp(-beta * mu - 1.0)))


def solve_dual(alpha, beta, capacity: float, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER, fill_price=None) -> DualSolution:
    """Minimize the dual and recover the optimal continuous prices.

    ``alpha`` and ``beta`` may have any (matching) shape; ``prices`` has the
    same shape.  Cells with ``alpha == 0`` do not enter the sums and get
    ``fill_price`` (broadcast against the shape, NaN if omitted).

    Raises
    ------
    NoDemandError
        When no cell has positive demand.
    ConvergenceError
        When the root finder exhausts ``max_iter``.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if capacity <= 0:
        raise InfeasibleError(f"capacity must be > 0, got {capacity}")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    live = alpha > 0
    if not live.any():
        raise NoDemandError("no demand: every cell has zero expected demand")
    a, b = alpha[live], beta[live]
    mu, iters, status = kernels.dual_solve(a, b, float(capacity), float(tol), int(max_iter))
    if status != kernels.OK:
        raise ConvergenceError(f"dual root finder did not converge in {max_iter} iterations (mu={mu})")
    mu = float(mu)

    prices = np.full(alpha.shape, np.nan)
    if fill_price is not None:
        prices = np.broadcast_to(np.asarray(fill_price, dtype=float), alpha.shape).copy()
    prices[live] = mu + 1.0 / b
    demand = a * np.exp(-b * (mu + 1.0 / b))
    primal_demand = float(demand.sum())
    primal_revenue = float(np.sum((mu + 1.0 / b) * demand))
    bound = float(kernels.dual_value(a, b, float(capacity), mu))
    grad = float(capacity) - primal_demand
    kkt = KKTResiduals(
        gradient=abs(grad) if mu > 0 else 0.0,
        capacity_slack=grad,
        complementary_slackness=mu * grad,
        duality_gap=bound - primal_revenue,
    )
    return DualSolution(mu, prices, bound, int(iters), kkt, primal_revenue, primal_demand)


def solve_relaxed(s: Scenario, capacity: float | None = None, start_time: int | None = None,
                  tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> DualSolution:
    """Relaxed optimum of a scenario; ``prices`` is shaped ``(n_products, horizon)``.

    Cells with ``t > start_time`` are in the past: they are left out and their
    price is NaN.  Zero-demand cells are priced at their ladder maximum.
    """
    alpha, beta = curve_arrays(s)
    if start_time is not None:
        alpha = alpha.copy()
        alpha[:, start_time + 1:] = 0.0
    cap = s.capacity if capacity is None else capacity
    fill = np.broadcast_to(s.max_prices()[:, None], alpha.shape).copy()
    if start_time is not None:
        fill[:, start_time + 1:] = np.nan
    return solve_dual(alpha, beta, cap, tol, max_iter, fill_price=fill)


def relaxed_bound(s: Scenario, capacity: float | None = None,
                  fixed: Mapping[tuple[int, int], float] | None = None,
                  start_time: int | None = None,
                  tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Upper bound on revenue given a partial assignment of prices.

    ``fixed`` maps ``(product_index, t)`` to a price.  The bound is the
    revenue of the fixed cells plus the relaxed optimum of the free cells
    under the capacity those fixed cells leave.

    Raises
    ------
    InfeasibleError
        If the fixed cells alone leave no room for the free ones (or exceed
        capacity when everything is fixed).
    """
    fixed = dict(fixed or {})
    alpha, beta = curve_arrays(s)
    cap = float(s.capacity if capacity is None else capacity)
    horizon = s.horizon if start_time is None else start_time + 1
    free = np.zeros(alpha.shape, dtype=bool)
    free[:, :horizon] = True
    fixed_rev = fixed_dem = 0.0
    for (i, t), p in fixed.items():
        if not free[i, t]:
            raise ValueError(f"cell ({i}, {t}) fixed twice or outside the horizon")
        free[i, t] = False
        q = alpha[i, t] * np.exp(-beta[i, t] * p)
        fixed_rev += p * q
        fixed_dem += q
    residual = cap - fixed_dem
    live = free & (alpha > 0)
    if not live.any():
        if residual < -1e-9 * max(cap, 1.0):
            raise InfeasibleError(f"fixed demand {fixed_dem:.6g} exceeds capacity {cap:.6g}")
        return float(fixed_rev)
    if residual <= 0:
        raise InfeasibleError(f"no residual capacity ({residual:.6g}) for the free cells")
    sol = solve_dual(alpha[live], beta[live], residual, tol, max_iter)
    return float(fixed_rev + sol.bound)
