"""Scenario data: types, validation, JSON loading and synthetic generation.

Cells are stored with the time index ascending (``t = 0 .. T-1``) but tickets
are sold in the opposite order: ``t = T-1`` opens the sale and ``t = 0`` is
the last step before departure.  Every loop over time in this package runs
in that selling order unless stated otherwise.

File format
-----------
A scenario is a UTF-8 JSON object::

    {
      "capacity": 180,
      "horizon": 30,
      "products": [
        {"id": "P1",
         "prices": [433, 500, 567, 633, 700],
         "demand": [... T numbers, mean demand at the lowest price ...],
         "frat5":  [... T numbers, all > 1 ...]}
      ]
    }

``prices`` must be strictly increasing.  ``demand[t]`` and ``frat5[t]`` are
indexed by the time step ``t``.  Unknown keys are rejected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import ScenarioParseError, ScenarioValidationError


@dataclass(frozen=True)
class DemandCell:
    """Demand data of one (product, time) cell."""

    mean_demand_at_min: float
    frat5: float


@dataclass(frozen=True)
class Product:
    id: str
    price_ladder: tuple[float, ...]
    cells: tuple[DemandCell, ...]

    @property
    def min_price(self) -> float:
        return self.price_ladder[0]

    @property
    def max_price(self) -> float:
        return self.price_ladder[-1]


@dataclass(frozen=True)
class Scenario:
    capacity: int
    horizon: int
    products: tuple[Product, ...]

    @property
    def product_ids(self) -> list[str]:
        return [p.id for p in self.products]

    @property
    def n_products(self) -> int:
        return len(self.products)

    def demand_matrix(self) -> np.ndarray:
        """Mean demand at the minimum price, shape ``(n_products, horizon)``."""
        return np.array([[c.mean_demand_at_min for c in p.cells] for p in self.products], dtype=float)

    def frat5_matrix(self) -> np.ndarray:
        return np.array([[c.frat5 for c in p.cells] for p in self.products], dtype=float)

    def min_prices(self) -> np.ndarray:
        return np.array([p.min_price for p in self.products], dtype=float)

    def max_prices(self) -> np.ndarray:
        return np.array([p.max_price for p in self.products], dtype=float)

    def with_capacity(self, capacity: int) -> "Scenario":
        return Scenario(capacity=capacity, horizon=self.horizon, products=self.products)


@dataclass(frozen=True)
class Violation:
    path: str
    rule: str


def validate_scenario(s: Scenario) -> list[Violation]:
    """Return every invariant violation of ``s``; an empty list means valid."""
    out: list[Violation] = []
    if not _is_int(s.capacity) or s.capacity < 1:
        out.append(Violation("capacity", "capacity >= 1"))
    horizon_ok = _is_int(s.horizon) and s.horizon >= 1
    if not horizon_ok:
        out.append(Violation("horizon", "horizon >= 1"))
    if len(s.products) < 1:
        out.append(Violation("products", "at least 1 product"))
    seen: set[str] = set()
    for i, p in enumerate(s.products):
        base = f"products[{i}]"
        if not isinstance(p.id, str) or not p.id:
            out.append(Violation(f"{base}.id", "id is a non-empty string"))
        elif p.id in seen:
            out.append(Violation(f"{base}.id", "product ids are unique"))
        else:
            seen.add(p.id)
        ladder = p.price_ladder
        if len(ladder) == 0:
            out.append(Violation(f"{base}.prices", "price ladder is non-empty"))
        else:
            if any(not _is_finite_number(x) or x <= 0 for x in ladder):
                out.append(Violation(f"{base}.prices", "all prices > 0"))
            elif any(b <= a for a, b in zip(ladder, ladder[1:])):
                out.append(Violation(f"{base}.prices", "price ladder is strictly increasing"))
        if horizon_ok and len(p.cells) != s.horizon:
            out.append(Violation(f"{base}.cells", f"exactly horizon={s.horizon} cells"))
        for t, c in enumerate(p.cells):
            if not _is_finite_number(c.mean_demand_at_min) or c.mean_demand_at_min < 0:
                out.append(Violation(f"{base}.demand[{t}]", "demand >= 0"))
            if not _is_finite_number(c.frat5) or c.frat5 <= 1:
                out.append(Violation(f"{base}.frat5[{t}]", "frat5 > 1"))
    return out


def _is_int(x: Any) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _is_finite_number(x: Any) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool) and math.isfinite(x)


# -- serialization -----------------------------------------------------------

_TOP_KEYS = {"capacity", "horizon", "products"}
_PRODUCT_KEYS = {"id", "prices", "demand", "frat5"}


def scenario_from_dict(doc: Any) -> Scenario:
    """Build a :class:`Scenario` from decoded JSON and validate it."""
    violations: list[Violation] = []
    if not isinstance(doc, dict):
        raise ScenarioParseError("top level must be an object")
    for key in sorted(set(doc) - _TOP_KEYS):
        violations.append(Violation(key, "unknown field"))
    for key in sorted(_TOP_KEYS - set(doc)):
        violations.append(Violation(key, "missing field"))
    if violations:
        raise ScenarioValidationError(violations)

    capacity, horizon = doc["capacity"], doc["horizon"]
    if not _is_int(capacity):
        violations.append(Violation("capacity", "capacity is an integer"))
    if not _is_int(horizon):
        violations.append(Violation("horizon", "horizon is an integer"))
    raw_products = doc["products"]
    if not isinstance(raw_products, list):
        violations.append(Violation("products", "products is an array"))
        raise ScenarioValidationError(violations)

    products = []
    for i, rp in enumerate(raw_products):
        base = f"products[{i}]"
        if not isinstance(rp, dict):
            violations.append(Violation(base, "product is an object"))
            continue
        bad_keys = sorted(set(rp) - _PRODUCT_KEYS)
        missing = sorted(_PRODUCT_KEYS - set(rp))
        violations += [Violation(f"{base}.{k}", "unknown field") for k in bad_keys]
        violations += [Violation(f"{base}.{k}", "missing field") for k in missing]
        if bad_keys or missing:
            continue
        ok = True
        for key in ("prices", "demand", "frat5"):
            arr = rp[key]
            if not isinstance(arr, list) or not all(_is_finite_number(x) for x in arr):
                violations.append(Violation(f"{base}.{key}", "array of finite numbers"))
                ok = False
        if not ok:
            continue
        if len(rp["demand"]) != len(rp["frat5"]):
            violations.append(Violation(f"{base}.frat5", "same length as demand"))
            continue
        cells = tuple(DemandCell(float(q), float(f)) for q, f in zip(rp["demand"], rp["frat5"]))
        products.append(Product(id=rp["id"], price_ladder=tuple(float(x) for x in rp["prices"]), cells=cells))
    if violations:
        raise ScenarioValidationError(violations)

    s = Scenario(capacity=capacity, horizon=horizon, products=tuple(products))
    violations = validate_scenario(s)
    if violations:
        raise ScenarioValidationError(violations)
    return s


def load_scenario(source: str) -> Scenario:
    """Parse a scenario document (see module docstring for the format).

    Raises
    ------
    ScenarioParseError
        If the text is not JSON or the top level is not an object.
    ScenarioValidationError
        Listing every violated invariant with its path.
    """
    try:
        doc = json.loads(source)
    except (json.JSONDecodeError, RecursionError) as exc:
        raise ScenarioParseError(f"malformed scenario document: {exc}") from exc
    return scenario_from_dict(doc)


def read_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def _num(x: float) -> int | float:
    return int(x) if float(x).is_integer() else float(x)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "capacity": int(s.capacity),
        "horizon": int(s.horizon),
        "products": [
            {
                "id": p.id,
                "prices": [_num(x) for x in p.price_ladder],
                "demand": [_num(c.mean_demand_at_min) for c in p.cells],
                "frat5": [_num(c.frat5) for c in p.cells],
            }
            for p in s.products
        ],
    }


def dump_scenario(s: Scenario) -> str:
    """Serialize to the canonical text form (stable key order, trailing newline)."""
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


# -- synthetic generation ----------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of :func:`generate_synthetic`.

    Ranges are inclusive ``(low, high)`` pairs.  Product 0 gets the most
    expensive price band, the last product the cheapest.  FRAT5 rises from the
    low end of ``frat5_range`` at the opening of sales towards the high end at
    departure, so willingness to pay grows as departure approaches.  With
    ``frat5_rising=False`` each product instead keeps one FRAT5, drawn from
    the range, over the whole horizon.
    """

    n_products: int = 3
    horizon: int = 30
    capacity: int = 180
    ladder_size: tuple[int, int] = (5, 8)
    price_range: tuple[float, float] = (150.0, 900.0)
    demand_range: tuple[float, float] = (0.5, 4.0)
    frat5_range: tuple[float, float] = (1.3, 1.8)
    frat5_rising: bool = True

    def check(self) -> None:
        for name in ("ladder_size", "price_range", "demand_range", "frat5_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: empty range ({lo}, {hi})")
        if self.n_products < 1 or self.horizon < 1 or self.capacity < 1:
            raise ValueError("n_products, horizon and capacity must be >= 1")
        if self.ladder_size[0] < 1:
            raise ValueError("ladder_size: at least one price per ladder")
        if self.price_range[0] <= 0:
            raise ValueError("price_range: prices must be > 0")
        if self.demand_range[0] < 0:
            raise ValueError("demand_range: demand must be >= 0")
        if self.frat5_range[0] <= 1:
            raise ValueError("frat5_range: frat5 must be > 1")


PRESETS: dict[str, GeneratorSpec] = {
    "standard": GeneratorSpec(),
    # About twice as many buyers as seats at the lowest fares; willingness to
    # pay rises towards departure.
    "demand-rich": GeneratorSpec(horizon=10, demand_range=(6.0, 18.0), frat5_range=(1.3, 1.8)),
    # About 1.5 buyers per seat at the lowest fares, dispersed and steady
    # willingness to pay.
    "demand-poor": GeneratorSpec(horizon=10, demand_range=(4.5, 13.5), frat5_range=(2.0, 4.0),
                                 frat5_rising=False),
}


def generate_synthetic(spec: GeneratorSpec, seed: int) -> Scenario:
    """Draw a random scenario; a pure function of ``(spec, seed)``.

    These scenarios are synthetic stand-ins, not measured airline data.
    """
    spec.check()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    lo, hi = spec.price_range
    n, T = spec.n_products, spec.horizon
    mins = np.sort(rng.uniform(lo, lo + 0.5 * (hi - lo), size=n))[::-1]
    # Time profile of the willingness to pay: 0 at the opening, 1 at departure.
    ramp = np.ones(T) if T == 1 else 1.0 - np.arange(T) / (T - 1)
    f_lo, f_hi = spec.frat5_range
    products = []
    for i in range(n):
        size = int(rng.integers(spec.ladder_size[0], spec.ladder_size[1] + 1))
        pmin = round(float(mins[i]))
        pmax = max(pmin, round(pmin + rng.uniform(0.3, 1.0) * (hi - pmin)))
        ladder = _ladder(rng, pmin, pmax, size)
        q = np.round(rng.uniform(*spec.demand_range, size=T), 4)
        jitter = rng.uniform(-0.05, 0.05, size=T) * (f_hi - f_lo)
        level = ramp if spec.frat5_rising else np.full(T, rng.uniform())
        f = np.clip(f_lo + (f_hi - f_lo) * level + jitter, f_lo, f_hi)
        f = np.round(np.maximum(f, 1.0 + 1e-3), 4)
        cells = tuple(DemandCell(float(a), float(b)) for a, b in zip(q, f))
        products.append(Product(id=f"P{i + 1}", price_ladder=ladder, cells=cells))
    s = Scenario(capacity=spec.capacity, horizon=T, products=tuple(products))
    assert not validate_scenario(s)
    return s


def _ladder(rng: np.random.Generator, pmin: int, pmax: int, size: int) -> tuple[float, ...]:
    if size == 1 or pmax <= pmin:
        return (float(pmin),)
    inner = rng.uniform(pmin, pmax, size=size - 2)
    ladder = np.unique(np.round(np.concatenate([[pmin, pmax], inner])))
    if len(ladder) < size:
        ladder = np.unique(np.round(np.linspace(pmin, pmax, size)))
    return tuple(float(x) for x in ladder)


# Buyers per seat at the lowest fares above which a scenario counts as demand-rich.
RICH_RATIO = 1.75


@dataclass(frozen=True)
class DemandSummary:
    per_product: dict[str, float]
    total: float
    capacity: int
    ratio: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ratio", self.total / self.capacity)

    def demand_rich(self, threshold: float = RICH_RATIO) -> bool:
        """True when demand at the lowest prices exceeds ``threshold`` times capacity."""
        return self.ratio >= threshold


def demand_summary(s: Scenario) -> DemandSummary:
    """Total expected demand at minimum prices, per product and overall."""
    per = {p.id: float(sum(c.mean_demand_at_min for c in p.cells)) for p in s.products}
    return DemandSummary(per_product=per, total=float(sum(per.values())), capacity=s.capacity)


def make_scenario(capacity: int, products: Sequence[tuple[str, Sequence[float], Sequence[float], Sequence[float]]]) -> Scenario:
    """Convenience constructor from ``(id, prices, demand, frat5)`` tuples (validated)."""
    doc = {
        "capacity": capacity,
        "horizon": len(products[0][2]) if products else 0,
        "products": [
            {"id": pid, "prices": list(prices), "demand": list(q), "frat5": list(f)}
            for pid, prices, q, f in products
        ],
    }
    return scenario_from_dict(doc)
