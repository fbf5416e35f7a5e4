"""Choosing one ladder price per (product, time) under the capacity constraint.

Cells are visited in selling order: ``t = start_time`` down to 0, products in
scenario order within a step.  Cells with zero demand are not searched; they
are fixed at their product's top price.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .demand import DemandCurve, curve_arrays
from .errors import SearchBudgetExceeded
from .relaxed import DEFAULT_MAX_ITER, DEFAULT_TOL, relaxed_bound
from .scenario import Scenario


@dataclass(frozen=True)
class SearchConfig:
    """Options shared by the greedy and exact searches.

    monotone_prices
        Only consider plans whose prices never decrease as departure
        approaches.
    exact_size_limit
        Node budget of :func:`exact_optimize`.
    bound_tolerance
        Relative tolerance under which two revenues or bounds are treated as
        equal (dominance pruning and child tie-breaking).
    prune_dominated
        Drop ladder prices dominated by a higher price before searching
        (ignored when ``monotone_prices`` is set).
    """

    monotone_prices: bool = False
    exact_size_limit: int = 1_000_000
    bound_tolerance: float = 1e-9
    prune_dominated: bool = True

    def __post_init__(self):
        if self.exact_size_limit <= 0:
            raise ValueError("exact_size_limit must be > 0")


@dataclass(frozen=True)
class PricingPlan:
    """Price per (product, time); NaN for cells outside the planning horizon."""

    prices: np.ndarray
    expected_revenue: float
    expected_demand: float
    feasible: bool = True
    start_time: int | None = None


def prune_dominated_prices(ladder: Sequence[float], curve: DemandCurve, rel_tol: float = 1e-9) -> list[float]:
    """Remove every price beaten (or matched) in revenue by a higher price.

    A higher price with at least the same revenue sells fewer seats, so it
    frees capacity at no cost and the lower one can never be optimal.
    """
    if len(ladder) == 0:
        raise ValueError("empty ladder")
    p = np.asarray(ladder, dtype=float)
    rev = p * curve.alpha * np.exp(-curve.beta * p)
    keep = []
    best_above = -np.inf
    for k in range(len(p) - 1, -1, -1):
        if best_above < rev[k] - rel_tol * abs(rev[k]) or k == len(p) - 1:
            keep.append(float(p[k]))
        best_above = max(best_above, rev[k])
    return keep[::-1]


def residual_min_demand(cells: Sequence[tuple[DemandCurve, Sequence[float]]]) -> float:
    """Least demand the given free cells can induce: all priced at their ladder top."""
    return float(sum(c.alpha * math.exp(-c.beta * max(ladder)) for c, ladder in cells))


# -- problem layout ------------------------------------------------------------

@dataclass
class _Layout:
    cells: list[tuple[int, int]]  # searched cells in visitation order
    alpha: np.ndarray
    beta: np.ndarray
    ladders: np.ndarray  # padded with NaN
    lens: np.ndarray
    prev: np.ndarray
    base_prices: np.ndarray  # (P, T): top price for in-horizon cells, NaN elsewhere


def _layout(s: Scenario, start_time: int | None, config: SearchConfig) -> _Layout:
    alpha, beta = curve_arrays(s)
    start = s.horizon - 1 if start_time is None else start_time
    if not 0 <= start < s.horizon:
        raise ValueError(f"start_time {start} outside [0, {s.horizon - 1}]")
    base = np.full(alpha.shape, np.nan)
    base[:, :start + 1] = s.max_prices()[:, None]
    cells, ladders, last = [], [], {}
    prev = []
    for t in range(start, -1, -1):
        for i, prod in enumerate(s.products):
            if alpha[i, t] <= 0:
                continue
            lad = list(prod.price_ladder)
            # Dominance pruning assumes cells are independent, which the
            # monotone chain breaks.
            if config.prune_dominated and not config.monotone_prices:
                lad = prune_dominated_prices(lad, DemandCurve(alpha[i, t], beta[i, t]), config.bound_tolerance)
            prev.append(last.get(i, -1))
            last[i] = len(cells)
            cells.append((i, t))
            ladders.append(lad)
    kmax = max((len(x) for x in ladders), default=1)
    pad = np.full((len(ladders), kmax), np.nan)
    for k, lad in enumerate(ladders):
        pad[k, :len(lad)] = lad
    idx = tuple(np.array(c, dtype=np.int64) for c in zip(*cells)) if cells else (np.array([], int),) * 2
    return _Layout(
        cells=cells,
        alpha=np.ascontiguousarray(alpha[idx]) if cells else np.zeros(0),
        beta=np.ascontiguousarray(beta[idx]) if cells else np.zeros(0),
        ladders=pad,
        lens=np.array([len(x) for x in ladders], dtype=np.int64),
        prev=np.array(prev, dtype=np.int64),
        base_prices=base,
    )


def _evaluate(s: Scenario, prices: np.ndarray) -> tuple[float, float]:
    alpha, beta = curve_arrays(s)
    live = ~np.isnan(prices)
    q = np.where(live, alpha * np.exp(-beta * np.where(live, prices, 0.0)), 0.0)
    return float(np.sum(np.where(live, prices, 0.0) * q)), float(q.sum())


def _plan(s: Scenario, prices: np.ndarray, feasible: bool, start_time: int | None) -> PricingPlan:
    rev, dem = _evaluate(s, prices)
    return PricingPlan(prices, rev, dem, feasible, start_time)


def _all_max_feasible(lay: _Layout, capacity: float) -> bool:
    if not lay.cells:
        return True
    top = lay.ladders[np.arange(len(lay.cells)), lay.lens - 1]
    dmin = float(np.sum(lay.alpha * np.exp(-lay.beta * top)))
    return dmin <= capacity + 1e-9 * max(capacity, 1.0)


def greedy_optimize(s: Scenario, capacity: float | None = None, start_time: int | None = None,
                    config: SearchConfig = SearchConfig()) -> PricingPlan:
    """Bound-guided greedy descent of the branch-and-bound tree.

    At each cell every candidate price is scored by the relaxed bound of the
    subtree it opens and the best one is taken (ties go to the higher price).
    The search only backtracks when a branch cannot be completed within
    capacity.  If even the all-top-price plan overflows capacity, that plan is
    returned with ``feasible=False``.
    """
    cap = float(s.capacity if capacity is None else capacity)
    lay = _layout(s, start_time, config)
    prices = lay.base_prices.copy()
    if not lay.cells:
        return _plan(s, prices, True, start_time)
    if cap <= 0 or not _all_max_feasible(lay, cap):
        return _plan(s, prices, False, start_time)
    choice, status = kernels.greedy_search(
        lay.alpha, lay.beta, lay.ladders, lay.lens, lay.prev, cap,
        bool(config.monotone_prices), float(config.bound_tolerance), DEFAULT_TOL, DEFAULT_MAX_ITER,
    )
    if status != kernels.OK:
        return _plan(s, prices, False, start_time)
    for k, (i, t) in enumerate(lay.cells):
        prices[i, t] = lay.ladders[k, choice[k]]
    return _plan(s, prices, True, start_time)


def exact_optimize(s: Scenario, capacity: float | None = None, config: SearchConfig = SearchConfig(),
                   start_time: int | None = None) -> PricingPlan:
    """Best-first branch and bound; returns the true discrete optimum.

    Nodes are ordered by their relaxed bound.  A node is discarded when its
    bound cannot beat the incumbent or when even top prices on the remaining
    cells would overflow capacity.  Only meant for small instances.

    Raises
    ------
    SearchBudgetExceeded
        After ``config.exact_size_limit`` node expansions.
    """
    cap = float(s.capacity if capacity is None else capacity)
    lay = _layout(s, start_time, config)
    prices = lay.base_prices.copy()
    n = len(lay.cells)
    if n == 0:
        return _plan(s, prices, True, start_time)
    if cap <= 0 or not _all_max_feasible(lay, cap):
        return _plan(s, prices, False, start_time)

    k_idx = np.arange(n)
    lad = np.where(np.isnan(lay.ladders), 0.0, lay.ladders)
    dem = lay.alpha[:, None] * np.exp(-lay.beta[:, None] * lad)
    rev = lad * dem
    dmin = dem[k_idx, lay.lens - 1]
    min_rest = np.concatenate([np.cumsum(dmin[::-1])[::-1][1:], [0.0]])
    slack = 1e-9 * max(cap, 1.0)
    tol = config.bound_tolerance

    best_val, best_choice = -np.inf, None
    counter = itertools.count()
    root_bound = relaxed_bound(s, cap, start_time=start_time)
    heap = [(-root_bound, next(counter), 0, (), 0.0, 0.0)]
    expanded = 0
    while heap:
        neg_b, _, depth, choices, r, d = heapq.heappop(heap)
        if -neg_b < best_val - tol * abs(best_val):
            break
        expanded += 1
        if expanded > config.exact_size_limit:
            raise SearchBudgetExceeded(f"more than {config.exact_size_limit} nodes expanded")
        m = lay.lens[depth]
        cs = np.arange(m)
        new_d = d + dem[depth, :m]
        ok = new_d + min_rest[depth] <= cap + slack
        if config.monotone_prices and lay.prev[depth] >= 0:
            pk = lay.prev[depth]
            ok &= lad[depth, :m] >= lad[pk, choices[pk]] * (1.0 - 1e-12)
        cs = cs[ok]
        if depth + 1 == n:
            # Highest price first so that a tie keeps the higher price.
            for c in cs[::-1]:
                val = r + rev[depth, c]
                if best_choice is None or val > best_val + tol * abs(best_val):
                    best_val, best_choice = val, choices + (int(c),)
            continue
        residual = cap - new_d[cs]
        cs, residual = cs[residual > 0], residual[residual > 0]
        if cs.size == 0:
            continue
        _, value, _ = kernels.dual_solve_many(
            lay.alpha[depth + 1:], lay.beta[depth + 1:], residual, DEFAULT_TOL, DEFAULT_MAX_ITER
        )
        for c, v in zip(cs, value):
            b = r + rev[depth, c] + v
            if b < best_val - tol * abs(best_val):
                continue
            heapq.heappush(heap, (-b, next(counter), depth + 1, choices + (int(c),),
                                  r + rev[depth, c], new_d[c]))
    if best_choice is None:
        return _plan(s, prices, False, start_time)
    for k, (i, t) in enumerate(lay.cells):
        prices[i, t] = lay.ladders[k, best_choice[k]]
    return _plan(s, prices, True, start_time)


def plan_stats(plan: PricingPlan, s: Scenario, capacity: float | None = None) -> dict:
    """Expected revenue and demand of ``plan`` and its share of the relaxed bound."""
    if plan.prices.shape != (s.n_products, s.horizon):
        raise ValueError("plan shape does not match scenario")
    rev, dem = _evaluate(s, plan.prices)
    bound = relaxed_bound(s, capacity, start_time=plan.start_time)
    return {"expected_revenue": rev, "expected_demand": dem, "bound": bound,
            "bound_ratio": rev / bound if bound > 0 else float("nan")}
