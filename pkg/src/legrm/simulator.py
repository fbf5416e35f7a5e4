"""Stochastic passenger arrivals and policy execution.

Random streams
--------------
All draws use numpy's PCG64 seeded through ``SeedSequence``:

* replication ``i`` of a Monte Carlo run gets the 64-bit seed
  ``SeedSequence(master_seed, spawn_key=(i,)).generate_state(1, uint64)[0]``;
* inside a replication, the arrivals of family ``f`` at step ``t`` come from
  ``SeedSequence(seed, spawn_key=(t, f))`` (Poisson count, then the
  willingness-to-pay draws), and the interleaving order of all families at
  step ``t`` from ``SeedSequence(seed, spawn_key=(t,))``.

Arrivals therefore depend only on the true scenario and the seed, never on
the policy being evaluated, which gives common random numbers across
policies for free.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .demand import LN2
from .discrete import PricingPlan, SearchConfig, greedy_optimize
from .errors import PolicyError, ShapeMismatchError
from .policies import AvailabilityPolicy
from .scenario import Scenario


@dataclass(frozen=True)
class ArrivalEvent:
    family: str
    wtp: float
    time_step: int


@dataclass
class StepRecord:
    t: int
    offered: dict[str, str]
    arrivals: dict[str, int]
    sales: dict[str, int]
    revenue: float
    # (family, wtp, price paid or None) in arrival order
    events: list[tuple[str, float, float | None]] = field(default_factory=list)


@dataclass
class SimulationOutcome:
    revenue: float
    seats_sold: int
    capacity: int
    seed: int | None
    ledger: list[StepRecord]

    @property
    def remaining(self) -> int:
        return self.capacity - self.seats_sold


# -- arrivals ----------------------------------------------------------------

def _gen(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def replication_seed(master_seed: int, i: int) -> int:
    return int(np.random.SeedSequence(master_seed, spawn_key=(i,)).generate_state(1, np.uint64)[0])


def sample_arrivals(s: Scenario, t: int, seed: int) -> list[ArrivalEvent]:
    """Arrivals of step ``t``: Poisson counts per family, shifted-exponential
    willingness to pay, families interleaved in uniformly random order."""
    return list(_arrivals(s, seed)[t])


@lru_cache(maxsize=2048)
def _arrivals(s: Scenario, seed: int) -> tuple[tuple[ArrivalEvent, ...], ...]:
    q = s.demand_matrix()
    f = s.frat5_matrix()
    out = []
    for t in range(s.horizon):
        events = []
        for i, prod in enumerate(s.products):
            if q[i, t] <= 0:
                continue
            rng = _gen(seed, (t, i))
            n = int(rng.poisson(q[i, t]))
            if n == 0:
                continue
            scale = prod.min_price * (f[i, t] - 1.0) / LN2
            wtp = prod.min_price + rng.exponential(scale, size=n)
            events.extend(ArrivalEvent(prod.id, float(w), t) for w in wtp)
        if len(events) > 1:
            order = _gen(seed, (t,)).permutation(len(events))
            events = [events[k] for k in order]
        out.append(tuple(events))
    return tuple(out)


def _events_by_step(s: Scenario, seed: int | None, arrivals: Sequence[ArrivalEvent] | None):
    if arrivals is None:
        if seed is None:
            raise ValueError("either seed or arrivals is required")
        return _arrivals(s, seed)
    steps: list[list[ArrivalEvent]] = [[] for _ in range(s.horizon)]
    for e in arrivals:
        steps[e.time_step].append(e)
    return steps


# -- execution ---------------------------------------------------------------

def simulate_policy(s: Scenario, policy: AvailabilityPolicy, capacity: int | None = None,
                    seed: int | None = None, arrivals: Sequence[ArrivalEvent] | None = None) -> SimulationOutcome:
    """Run a nested availability policy against one arrival stream.

    At the start of each step the booking limits are re-derived from the
    stored protections and the seats left.  Within the step a buyer takes
    the cheapest open fare of their family that does not exceed their
    willingness to pay.  A sale in class ``m`` consumes one seat of the
    limit of every class at or above ``m`` in the policy order.  ``arrivals``
    overrides the random stream (events are replayed in the given order).
    """
    cap = int(s.capacity if capacity is None else capacity)
    family_ids = set(s.product_ids)
    steps = _events_by_step(s, seed, arrivals)
    remaining = cap
    revenue = 0.0
    ledger = []
    for t in range(s.horizon - 1, -1, -1):
        if t not in policy.steps:
            raise PolicyError(f"policy {policy.name!r} has no entry for step {t}")
        nested = policy.steps[t]
        classes = nested.ordered_classes
        for c in classes:
            if c.family not in family_ids:
                raise PolicyError(f"policy family {c.family!r} not in scenario")
        avail = [int(math.floor(b + 1e-9)) for b in nested.limits_for(remaining)]
        by_family: dict[str, list[int]] = {}
        for j in sorted(range(len(classes)), key=lambda j: (classes[j].fare, j)):
            by_family.setdefault(classes[j].family, []).append(j)
        offered = {
            fam: ";".join(f"{classes[j].fare:.2f}@{avail[j]}" for j in sorted(js, key=lambda j: -classes[j].fare) if avail[j] > 0)
            for fam, js in by_family.items()
        }
        rec = StepRecord(t, offered, {}, {}, 0.0)
        for e in steps[t]:
            rec.arrivals[e.family] = rec.arrivals.get(e.family, 0) + 1
            price = None
            if remaining > 0:
                for j in by_family.get(e.family, ()):
                    fare = classes[j].fare
                    if fare > e.wtp:
                        break
                    if avail[j] > 0:
                        price = fare
                        for k in range(j + 1):
                            avail[k] -= 1
                        break
            if price is not None:
                remaining -= 1
                rec.sales[e.family] = rec.sales.get(e.family, 0) + 1
                rec.revenue += price
            rec.events.append((e.family, e.wtp, price))
        revenue += rec.revenue
        ledger.append(rec)
    return SimulationOutcome(revenue, cap - remaining, cap, seed, ledger)


def _run_prices(s: Scenario, price_for_step: Callable[[int, int], np.ndarray], cap: int,
                seed: int | None, arrivals) -> SimulationOutcome:
    steps = _events_by_step(s, seed, arrivals)
    index = {pid: i for i, pid in enumerate(s.product_ids)}
    remaining = cap
    revenue = 0.0
    ledger = []
    for t in range(s.horizon - 1, -1, -1):
        prices = price_for_step(t, remaining)
        offered = {pid: ("" if np.isnan(prices[i]) else f"{prices[i]:.2f}") for pid, i in index.items()}
        rec = StepRecord(t, offered, {}, {}, 0.0)
        for e in steps[t]:
            rec.arrivals[e.family] = rec.arrivals.get(e.family, 0) + 1
            p = prices[index[e.family]]
            price = None
            if remaining > 0 and not np.isnan(p) and e.wtp >= p:
                price = float(p)
                remaining -= 1
                rec.sales[e.family] = rec.sales.get(e.family, 0) + 1
                rec.revenue += price
            rec.events.append((e.family, e.wtp, price))
        revenue += rec.revenue
        ledger.append(rec)
    return SimulationOutcome(revenue, cap - remaining, cap, seed, ledger)


def simulate_fixed_prices(s: Scenario, plan: PricingPlan | np.ndarray, capacity: int | None = None,
                          seed: int | None = None, arrivals: Sequence[ArrivalEvent] | None = None) -> SimulationOutcome:
    """Post the plan's price for each (family, step); a buyer purchases iff
    their willingness to pay reaches it and a seat is left."""
    prices = plan.prices if isinstance(plan, PricingPlan) else np.asarray(plan, dtype=float)
    if prices.shape != (s.n_products, s.horizon):
        raise PolicyError(f"plan shape {prices.shape} does not match scenario {(s.n_products, s.horizon)}")
    cap = int(s.capacity if capacity is None else capacity)
    return _run_prices(s, lambda t, _r: prices[:, t], cap, seed, arrivals)


def check_same_shape(a: Scenario, b: Scenario) -> None:
    if a.horizon != b.horizon or a.product_ids != b.product_ids:
        raise ShapeMismatchError("scenarios differ in horizon or products")
    for pa, pb in zip(a.products, b.products):
        if pa.price_ladder != pb.price_ladder:
            raise ShapeMismatchError(f"price ladders of {pa.id!r} differ")


class RollingGreedy:
    """Greedy re-solve at every step, memoized on ``(t, seats left)``.

    The estimated scenario is fixed, so the plan posted at step ``t`` only
    depends on the remaining capacity; replications share the cache.
    """

    def __init__(self, estimated: Scenario, config: SearchConfig = SearchConfig()):
        self.estimated = estimated
        self.config = config
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    def prices(self, t: int, remaining: int) -> np.ndarray:
        key = (t, remaining)
        if key not in self._cache:
            if remaining <= 0:
                p = self.estimated.max_prices()
            else:
                plan = greedy_optimize(self.estimated, remaining, start_time=t, config=self.config)
                p = plan.prices[:, t]
            self._cache[key] = p
        return self._cache[key]


def simulate_greedy_rolling(estimated: Scenario, actual: Scenario, capacity: int | None = None,
                            seed: int | None = None, config: SearchConfig = SearchConfig(),
                            solver: RollingGreedy | None = None,
                            arrivals: Sequence[ArrivalEvent] | None = None) -> SimulationOutcome:
    """Rolling horizon: at each step re-run the greedy on the estimated data
    for the remaining steps and seats, post its prices for the current step
    only, then sell to arrivals drawn from the actual data."""
    check_same_shape(estimated, actual)
    if solver is None:
        solver = RollingGreedy(estimated, config)
    elif solver.estimated is not estimated and solver.estimated != estimated:
        raise ValueError("solver was built for another estimated scenario")
    cap = int(actual.capacity if capacity is None else capacity)
    return _run_prices(actual, solver.prices, cap, seed, arrivals)


# -- Monte Carlo -------------------------------------------------------------

@dataclass
class MonteCarloResult:
    mean: float
    std: float
    mean_seats: float
    std_seats: float
    outcomes: list[SimulationOutcome]
    seeds: list[int]
    n_warning: bool = False  # std is reported as 0 for a single replication

    @property
    def n(self) -> int:
        return len(self.outcomes)

    @property
    def revenues(self) -> np.ndarray:
        return np.array([o.revenue for o in self.outcomes])

    @property
    def seats(self) -> np.ndarray:
        return np.array([o.seats_sold for o in self.outcomes], dtype=float)


def monte_carlo(run: Callable[[int], SimulationOutcome], n: int, master_seed: int) -> MonteCarloResult:
    """Run ``n`` replications, replication ``i`` seeded by ``replication_seed(master_seed, i)``.

    Standard deviations use the ``n - 1`` denominator; with ``n == 1`` they
    are reported as 0 and ``n_warning`` is set.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seeds = [replication_seed(master_seed, i) for i in range(n)]
    outcomes = [run(sd) for sd in seeds]
    rev = np.array([o.revenue for o in outcomes])
    seats = np.array([o.seats_sold for o in outcomes], dtype=float)
    if n == 1:
        return MonteCarloResult(float(rev[0]), 0.0, float(seats[0]), 0.0, outcomes, seeds, True)
    return MonteCarloResult(float(rev.mean()), float(rev.std(ddof=1)), float(seats.mean()),
                            float(seats.std(ddof=1)), outcomes, seeds)


# -- ledger export -------------------------------------------------------------

def ledger_columns(family_ids: Sequence[str]) -> list[str]:
    cols = ["replication", "t"]
    for f in family_ids:
        cols += [f"{f}:offer", f"{f}:arrivals", f"{f}:sales"]
    return cols + ["revenue"]


def ledger_csv(outcomes: Sequence[SimulationOutcome], family_ids: Sequence[str]) -> str:
    """One row per (replication, step), steps in selling order.

    Columns: ``replication, t``, then ``<family>:offer, <family>:arrivals,
    <family>:sales`` for each family in scenario order, then ``revenue``.
    An offer is a price (``"250.00"``) for posted-price runs or
    ``"fare@seats;..."`` for nested policies, highest fare first.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ledger_columns(family_ids))
    for r, o in enumerate(outcomes):
        for rec in o.ledger:
            row: list = [r, rec.t]
            for f in family_ids:
                row += [rec.offered.get(f, ""), rec.arrivals.get(f, 0), rec.sales.get(f, 0)]
            row.append(f"{rec.revenue:.2f}")
            w.writerow(row)
    return buf.getvalue()
