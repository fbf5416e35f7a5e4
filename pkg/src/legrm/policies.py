"""Seat-protection policies: Littlewood, EMSRb and EMSRb on marginal revenues.

Demand of a fare class is modelled as Gaussian.  With a zero standard
deviation the convention is ``P(D >= y) = 1`` for ``y <= mean`` and 0 above,
so any protection ratio strictly between 0 and 1 protects exactly the mean.

Nesting
-------
Classes are ordered by (adjusted) fare, highest first.  ``protections[j]``
is the number of seats kept for classes ``0..j`` against class ``j + 1`` and
``booking_limits[j] = max(0, C - protections[j - 1])`` (the top class may use
the whole cabin).  A booking limit caps the combined sales of a class and of
every class below it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from .demand import LN2
from .scenario import Scenario


@dataclass(frozen=True)
class FareClass:
    family: str
    fare: float
    mean_demand: float
    std_demand: float = 0.0

    def __post_init__(self):
        if not self.fare > 0:
            raise ValueError(f"fare must be > 0, got {self.fare}")
        if self.mean_demand < 0 or self.std_demand < 0:
            raise ValueError("demand moments must be >= 0")


@dataclass(frozen=True)
class AdjustedClass:
    origin: FareClass
    adjusted_fare: float
    adjusted_mean: float
    adjusted_std: float
    cumulative_demand: float
    cumulative_revenue: float

    @property
    def family(self) -> str:
        return self.origin.family

    @property
    def fare(self) -> float:
        return self.origin.fare


@dataclass(frozen=True)
class NestedPolicy:
    ordered_classes: tuple[AdjustedClass, ...]
    protections: np.ndarray
    booking_limits: np.ndarray
    capacity: float
    n_open: int | None = None  # classes past this index are closed outright

    def limits_for(self, capacity: float) -> np.ndarray:
        """Booking limits re-derived for a different remaining capacity."""
        n = len(self.ordered_classes)
        limits = np.empty(n)
        if n:
            limits[0] = capacity
            limits[1:] = np.maximum(0.0, capacity - np.minimum(self.protections, capacity))
        if self.n_open is not None:
            limits[self.n_open:] = 0.0
        return limits

    def open_classes(self) -> list[tuple[str, float, float]]:
        """``(family, fare, limit)`` for every class with a positive limit."""
        return [(c.family, c.fare, float(b)) for c, b in zip(self.ordered_classes, self.booking_limits) if b >= 1.0 - 1e-9]


def _gaussian_upper_quantile(mean: float, std: float, ratio: float) -> float:
    """Smallest ``y`` with ``P(D >= y) = ratio`` for ``D ~ N(mean, std)``."""
    if ratio >= 1.0:
        return 0.0
    if ratio <= 0.0:
        return math.inf
    if std == 0.0:
        return mean
    return mean + std * float(ndtri(1.0 - ratio))


def littlewood_protection(p1: float, p2: float, mean: float, std: float) -> float:
    """Seats to protect for the high fare ``p1`` against the low fare ``p2``."""
    if not (p1 > 0 and p2 > 0):
        raise ValueError("fares must be > 0")
    if p2 >= p1:
        return 0.0
    return max(0.0, _gaussian_upper_quantile(mean, std, p2 / p1))


def _as_adjusted(c: FareClass) -> AdjustedClass:
    return AdjustedClass(c, c.fare, c.mean_demand, c.std_demand, c.mean_demand, c.fare * c.mean_demand)


def emsrb_policy(classes: Sequence[FareClass | AdjustedClass], capacity: float) -> NestedPolicy:
    """EMSRb on independent classes (plain or already adjusted).

    Each prefix of the fare-ordered classes is collapsed into one class with
    summed mean and variance and a demand-weighted fare, then Littlewood's
    rule sets the protection against the next class.
    """
    adj = [c if isinstance(c, AdjustedClass) else _as_adjusted(c) for c in classes]
    if not adj:
        raise ValueError("no fare classes")
    # Stable: equal adjusted fares keep their input order.
    adj = sorted(adj, key=lambda c: -c.adjusted_fare)
    n = len(adj)
    fares = np.array([c.adjusted_fare for c in adj])
    means = np.array([c.adjusted_mean for c in adj])
    var = np.array([c.adjusted_std for c in adj]) ** 2
    prot = np.zeros(max(n - 1, 0))
    cum_m = np.cumsum(means)
    cum_v = np.cumsum(var)
    cum_fm = np.cumsum(fares * means)
    cap = max(float(capacity), 0.0)
    for j in range(n - 1):
        if cum_m[j] <= 0:
            continue
        avg_fare = cum_fm[j] / cum_m[j]
        ratio = fares[j + 1] / avg_fare if avg_fare > 0 else 0.0
        y = _gaussian_upper_quantile(cum_m[j], math.sqrt(cum_v[j]), ratio)
        prot[j] = min(max(y, 0.0), cap)
    prot = np.maximum.accumulate(prot) if n > 1 else prot
    pol = NestedPolicy(tuple(adj), prot, np.zeros(n), cap)
    return replace(pol, booking_limits=pol.limits_for(cap))


def mr_transform(family_classes: Sequence[FareClass]) -> list[AdjustedClass]:
    """Marginal-revenue transformation of one family's classes.

    With ``Q_k`` the demand willing to pay at least the k-th fare and every
    one of those buyers paying that fare when it is the cheapest open,
    ``TR_k = f_k * Q_k`` and ``MR_k = (TR_k - TR_{k-1}) / (Q_k - Q_{k-1})``.
    The adjusted class keeps its own demand and gets ``MR_k`` as fare, which
    may be negative.  A class with no demand of its own has no marginal
    revenue; it keeps the previous class's adjusted fare and the next class
    is compared with the last class that had demand.
    """
    fares = [c.fare for c in family_classes]
    if any(b >= a for a, b in zip(fares, fares[1:])):
        raise ValueError("fares within a family must be strictly decreasing")
    out: list[AdjustedClass] = []
    q = 0.0
    last_q = last_tr = 0.0
    for k, c in enumerate(family_classes):
        q += c.mean_demand
        tr = c.fare * q
        if k == 0:
            mr = c.fare
        elif q > last_q:
            mr = (tr - last_tr) / (q - last_q)
        else:
            mr = out[-1].adjusted_fare
        out.append(AdjustedClass(c, mr, c.mean_demand, c.std_demand, q, tr))
        if q > last_q or k == 0:
            last_q, last_tr = q, tr
    return out


def _by_family(classes: Sequence[FareClass]) -> dict[str, list[FareClass]]:
    fam: dict[str, list[FareClass]] = {}
    for c in classes:
        fam.setdefault(c.family, []).append(c)
    return {k: sorted(v, key=lambda c: -c.fare) for k, v in fam.items()}


def mrt_nested(classes: Sequence[FareClass], capacity: float) -> NestedPolicy:
    """Transform each family, drop classes with ``MR <= 0``, pool and run EMSRb.

    Dropped classes are appended at the bottom of the order with a zero
    booking limit, so they stay visible but closed.
    """
    kept, dropped = [], []
    for fam in _by_family(classes).values():
        for a in mr_transform(fam):
            (kept if a.adjusted_fare > 0 else dropped).append(a)
    if not kept:
        return NestedPolicy(tuple(dropped), np.full(max(len(dropped) - 1, 0), float(capacity)),
                            np.zeros(len(dropped)), float(capacity), n_open=0)
    pol = emsrb_policy(kept, capacity)
    return _append_closed(pol, dropped)


def classic_nested(classes: Sequence[FareClass], capacity: float) -> NestedPolicy:
    """EMSRb that treats every fare as an independent class."""
    return emsrb_policy(list(classes), capacity)


def _append_closed(pol: NestedPolicy, closed: list[AdjustedClass]) -> NestedPolicy:
    if not closed:
        return pol
    cap = pol.capacity
    prot = np.concatenate([pol.protections, np.full(len(closed), cap)])
    return NestedPolicy(pol.ordered_classes + tuple(closed), prot,
                        np.concatenate([pol.booking_limits, np.zeros(len(closed))]), cap,
                        n_open=len(pol.ordered_classes))


# -- scenario-level policies ---------------------------------------------------

@dataclass(frozen=True)
class AvailabilityPolicy:
    """One nested policy per time step; what the simulator executes.

    ``steps[t]`` was built from the demand aggregated over steps ``t..0``.
    The simulator re-derives booking limits from the stored protections and
    the capacity actually left at the start of each step.
    """

    name: str
    capacity: float
    steps: dict[int, NestedPolicy] = field(default_factory=dict)


def fare_classes_at(s: Scenario, t: int) -> list[FareClass]:
    """Fare classes seen from step ``t`` with demand aggregated over ``t..0``.

    Demand attached to ladder fare ``p_k`` is the expected number of buyers
    whose willingness to pay falls in ``[p_k, p_{k+1})``; the top fare takes
    the whole tail.  Arrivals being Poisson, each class's variance equals its
    mean.
    """
    q = s.demand_matrix()[:, : t + 1]
    f = s.frat5_matrix()[:, : t + 1]
    out = []
    for i, prod in enumerate(s.products):
        lad = np.asarray(prod.price_ladder)
        # surv[k, s] = share of step-s buyers willing to pay lad[k]
        surv = np.exp(-LN2 / (f[i] - 1.0)[None, :] * (lad / prod.min_price - 1.0)[:, None])
        band = surv.copy()
        band[:-1] -= surv[1:]
        means = (band * q[i]).sum(axis=1)
        for k in range(len(lad) - 1, -1, -1):
            m = float(max(means[k], 0.0))
            out.append(FareClass(prod.id, float(lad[k]), m, math.sqrt(m)))
    return out


def _build(s: Scenario, capacity: float | None, as_of_time: int | None, nested, name) -> AvailabilityPolicy:
    cap = float(s.capacity if capacity is None else capacity)
    start = s.horizon - 1 if as_of_time is None else as_of_time
    if not 0 <= start < s.horizon:
        raise ValueError(f"as_of_time {start} outside the horizon")
    steps = {t: nested(fare_classes_at(s, t), cap) for t in range(start, -1, -1)}
    return AvailabilityPolicy(name, cap, steps)


def mrt_emsrb_policy(s: Scenario, capacity: float | None = None, as_of_time: int | None = None) -> AvailabilityPolicy:
    return _build(s, capacity, as_of_time, mrt_nested, "mrt-emsrb")


def classic_emsrb_policy(s: Scenario, capacity: float | None = None, as_of_time: int | None = None) -> AvailabilityPolicy:
    return _build(s, capacity, as_of_time, classic_nested, "emsrb")


def single_step_policy(nested: NestedPolicy, name: str = "static", t: int = 0) -> AvailabilityPolicy:
    return AvailabilityPolicy(name, nested.capacity, {t: nested})
