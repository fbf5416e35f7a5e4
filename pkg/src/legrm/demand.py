"""Exponential price-response model parameterized by FRAT5.

Expected demand for a cell offered at price ``p`` is::

    q(p) = Q * exp(-ln2 / (F - 1) * (p / pmin - 1)) = alpha * exp(-beta * p)

with ``beta = ln2 / ((F - 1) * pmin)`` and ``alpha = Q * exp(ln2 / (F - 1))``.
Equivalently each potential buyer has a willingness to pay distributed as
``pmin + Exponential(scale)`` with ``scale = pmin * (F - 1) / ln2 = 1 / beta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .scenario import Scenario

LN2 = math.log(2.0)


@dataclass(frozen=True)
class DemandCurve:
    alpha: float
    beta: float

    @property
    def revenue_peak(self) -> float:
        """Price maximizing ``p * q(p)``."""
        return 1.0 / self.beta


@dataclass(frozen=True)
class WtpDistribution:
    """Shifted exponential law of the maximum price a buyer accepts."""

    min_price: float
    scale: float

    def tail(self, p: float) -> float:
        """``P(WTP >= p)``."""
        if p <= self.min_price:
            return 1.0
        return math.exp(-(p - self.min_price) / self.scale)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.min_price + rng.exponential(self.scale, size=size)


def _check_frat5(frat5: float, min_price: float) -> None:
    if not frat5 > 1:
        raise ValueError(f"frat5 must be > 1, got {frat5}")
    if not min_price > 0:
        raise ValueError(f"min_price must be > 0, got {min_price}")


def curve_from_frat5(q_min: float, frat5: float, min_price: float) -> DemandCurve:
    _check_frat5(frat5, min_price)
    if q_min < 0:
        raise ValueError(f"q_min must be >= 0, got {q_min}")
    k = LN2 / (frat5 - 1.0)
    return DemandCurve(alpha=q_min * math.exp(k), beta=k / min_price)


def expected_demand(c: DemandCurve, p: float) -> float:
    if p < 0:
        raise ValueError(f"negative price {p}")
    return c.alpha * math.exp(-c.beta * p)


def expected_revenue(c: DemandCurve, p: float) -> float:
    return p * expected_demand(c, p)


def survival_probability(frat5: float, min_price: float, p: float) -> float:
    """Share of the buyers counted at ``min_price`` who still buy at ``p``.

    Clamped to 1 below ``min_price``.
    """
    _check_frat5(frat5, min_price)
    if p <= min_price:
        return 1.0
    return math.exp(-LN2 / (frat5 - 1.0) * (p / min_price - 1.0))


def wtp_distribution(frat5: float, min_price: float) -> WtpDistribution:
    _check_frat5(frat5, min_price)
    return WtpDistribution(min_price=min_price, scale=min_price * (frat5 - 1.0) / LN2)


# -- array forms -------------------------------------------------------------

def stack_curves(curves: Sequence[DemandCurve]) -> tuple[np.ndarray, np.ndarray]:
    alpha = np.array([c.alpha for c in curves], dtype=float)
    beta = np.array([c.beta for c in curves], dtype=float)
    return alpha, beta


def curve_arrays(s: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """``alpha`` and ``beta`` for every cell, each shaped ``(n_products, horizon)``."""
    q = s.demand_matrix()
    f = s.frat5_matrix()
    k = LN2 / (f - 1.0)
    beta = k / s.min_prices()[:, None]
    alpha = q * np.exp(k)
    return alpha, beta


def survival_matrix(s: Scenario, prices: np.ndarray) -> np.ndarray:
    """Survival probability of every cell at ``prices`` (broadcast against ``(P, T)``)."""
    f = s.frat5_matrix()
    pmin = s.min_prices()[:, None]
    ratio = np.maximum(np.asarray(prices, dtype=float) / pmin - 1.0, 0.0)
    return np.exp(-LN2 / (f - 1.0) * ratio)


def cell_curve(s: Scenario, product: int, t: int) -> DemandCurve:
    p = s.products[product]
    c = p.cells[t]
    return curve_from_frat5(c.mean_demand_at_min, c.frat5, p.min_price)
