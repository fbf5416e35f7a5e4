"""Scenario builders and strategies shared by the test modules."""
import math

from hypothesis import strategies as st

from legrm.policies import FareClass
from legrm.scenario import make_scenario
from legrm.simulator import ArrivalEvent


def single_cell(capacity=50, q=100.0, f=2.0, prices=(100.0, 150.0, 200.0, 300.0)):
    return make_scenario(capacity, [("A", list(prices), [q], [f])])


def cls_classes():
    """Two fares of one family and one fare of another, deterministic demand."""
    return [FareClass("1", 1200.0, 31.0, 0.0), FareClass("1", 1000.0, 11.0, 0.0), FareClass("2", 800.0, 15.0, 0.0)]


def cls_scenario(capacity=40):
    return make_scenario(capacity, [("1", [1000.0, 1200.0], [1.0], [2.0]), ("2", [800.0], [1.0], [2.0])])


def cls_arrivals():
    """Six groups of ten buyers, in this order; the 800 groups shop family 2."""
    groups = [("1", 1200.0), ("1", 1000.0), ("2", 800.0), ("1", 1200.0), ("1", 1200.0), ("2", 800.0)]
    return [ArrivalEvent(f, w, 0) for f, w in groups for _ in range(10)]


@st.composite
def scenarios(draw, max_products=3, max_horizon=4, max_prices=4, capacity=None):
    n = draw(st.integers(1, max_products))
    T = draw(st.integers(1, max_horizon))
    cap = capacity if capacity is not None else draw(st.integers(1, 300))
    prods = []
    for i in range(n):
        k = draw(st.integers(1, max_prices))
        base = draw(st.integers(50, 500))
        steps = draw(st.lists(st.integers(1, 200), min_size=k - 1, max_size=k - 1))
        prices = [float(base)]
        for s_ in steps:
            prices.append(prices[-1] + s_)
        q = draw(st.lists(st.floats(0.0, 50.0, allow_nan=False).map(lambda x: round(x, 3)), min_size=T, max_size=T))
        f = draw(st.lists(st.floats(1.2, 4.0).map(lambda x: round(x, 3)), min_size=T, max_size=T))
        prods.append((f"P{i}", prices, q, f))
    return make_scenario(cap, prods)


def has_demand(s):
    return any(c.mean_demand_at_min > 0 for p in s.products for c in p.cells)


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))

