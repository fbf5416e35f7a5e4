from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import cls_classes, cls_scenario
from legrm.policies import (FareClass, classic_emsrb_policy, classic_nested, emsrb_policy, fare_classes_at,
                            littlewood_protection, mr_transform, mrt_emsrb_policy, mrt_nested)
from legrm.scenario import GeneratorSpec, generate_synthetic, make_scenario


def test_littlewood_median():
    assert littlewood_protection(200.0, 100.0, 50.0, 10.0) == pytest.approx(50.0, abs=1e-12)


def test_littlewood_quantile():
    expected = 50.0 + 10.0 * NormalDist().inv_cdf(0.8)
    assert expected == pytest.approx(58.416, abs=1e-3)
    assert littlewood_protection(200.0, 40.0, 50.0, 10.0) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("p2", [200.0, 250.0])
def test_littlewood_no_protection_when_low_fare_not_lower(p2):
    assert littlewood_protection(200.0, p2, 50.0, 10.0) == 0.0


def test_littlewood_deterministic_demand():
    assert littlewood_protection(1200.0, 1000.0, 31.0, 0.0) == 31.0


@given(st.floats(1.0, 1e4), st.floats(0.01, 0.99), st.floats(0.0, 200.0), st.floats(0.0, 50.0))
def test_littlewood_matches_normal_quantile(p1, ratio, mean, std):
    y = littlewood_protection(p1, p1 * ratio, mean, std)
    expected = mean if std == 0 else mean + std * NormalDist().inv_cdf(1.0 - ratio)
    assert y == pytest.approx(max(expected, 0.0), rel=1e-9, abs=1e-9)


def test_emsrb_single_class():
    pol = emsrb_policy([FareClass("a", 100.0, 10.0, 3.0)], 25)
    assert pol.protections.size == 0 and pol.booking_limits.tolist() == [25.0]


def test_emsrb_two_deterministic_classes():
    pol = emsrb_policy(cls_classes()[:2], 40)
    assert pol.protections.tolist() == [31.0]
    assert pol.booking_limits.tolist() == [40.0, 9.0]


def test_emsrb_three_classes_prefix_protection():
    pol = classic_nested(cls_classes(), 40)
    # prefix of the two family-1 fares protects its full 42, capped at 40
    assert [c.fare for c in pol.ordered_classes] == [1200.0, 1000.0, 800.0]
    assert pol.protections.tolist() == [31.0, 40.0]
    assert pol.booking_limits.tolist() == [40.0, 9.0, 0.0]


def _emsrb_oracle(fares, means, stds, cap):
    """Prefix aggregation written out directly, with statistics.NormalDist."""
    order = sorted(range(len(fares)), key=lambda j: -fares[j])
    f = [fares[j] for j in order]
    m = [means[j] for j in order]
    v = [stds[j] ** 2 for j in order]
    prot = []
    for j in range(len(f) - 1):
        mu, var = sum(m[:j + 1]), sum(v[:j + 1])
        if mu <= 0:
            prot.append(0.0)
            continue
        avg = sum(a * b for a, b in zip(f[:j + 1], m[:j + 1])) / mu
        r = f[j + 1] / avg
        if r >= 1:
            y = 0.0
        elif var == 0:
            y = mu
        else:
            y = NormalDist(mu, var ** 0.5).inv_cdf(1 - r)
        prot.append(min(max(y, 0.0), cap))
    return np.maximum.accumulate(prot) if prot else np.array([])


@given(st.lists(st.tuples(st.integers(50, 2000), st.floats(0.0, 40.0), st.floats(0.0, 8.0)),
                min_size=1, max_size=7, unique_by=lambda x: x[0]),
       st.integers(0, 150))
def test_emsrb_properties_and_oracle(cls, cap):
    classes = [FareClass("f", float(p), m, s) for p, m, s in cls]
    pol = emsrb_policy(classes, cap)
    prot, lim = pol.protections, pol.booking_limits
    assert np.all(np.diff(prot) >= 0)
    assert np.all(np.diff(lim) <= 0)
    assert lim[0] == cap
    assert np.all((0 <= prot) & (prot <= cap))
    expected = _emsrb_oracle([c.fare for c in classes], [c.mean_demand for c in classes],
                             [c.std_demand for c in classes], cap)
    assert np.allclose(prot, expected, rtol=1e-9, atol=1e-9)


def test_mr_transform_golden():
    fam1 = mr_transform(cls_classes()[:2])
    assert [a.cumulative_demand for a in fam1] == [31.0, 42.0]
    assert [a.cumulative_revenue for a in fam1] == [37200.0, 42000.0]
    assert fam1[0].adjusted_fare == 1200.0
    assert fam1[1].adjusted_fare == pytest.approx((42000.0 - 37200.0) / 11.0, rel=1e-15)
    assert fam1[1].adjusted_fare == pytest.approx(436.36, abs=0.01)
    fam2 = mr_transform(cls_classes()[2:])
    assert fam2[0].adjusted_fare == 800.0 and fam2[0].adjusted_mean == 15.0


def test_mr_transform_zero_demand_class():
    fam = [FareClass("a", 300.0, 5.0), FareClass("a", 250.0, 0.0), FareClass("a", 200.0, 5.0)]
    out = mr_transform(fam)
    assert out[1].adjusted_fare == out[0].adjusted_fare == 300.0
    # the third class is compared with the first: (200*10 - 300*5) / 5
    assert out[2].adjusted_fare == pytest.approx(100.0)


def test_mr_transform_requires_decreasing_fares():
    with pytest.raises(ValueError):
        mr_transform([FareClass("a", 100.0, 1.0), FareClass("a", 100.0, 1.0)])


@given(st.lists(st.tuples(st.integers(10, 3000), st.floats(0.0, 30.0)), min_size=1, max_size=8,
                unique_by=lambda x: x[0]))
def test_mr_transform_invariants(cls):
    fam = [FareClass("a", float(p), m) for p, m in sorted(cls, key=lambda x: -x[0])]
    out = mr_transform(fam)
    assert out[0].adjusted_fare == fam[0].fare
    assert all(b.cumulative_demand >= a.cumulative_demand for a, b in zip(out, out[1:]))
    for a, c in zip(out, fam):
        assert a.cumulative_revenue == pytest.approx(c.fare * a.cumulative_demand)
        assert a.adjusted_fare <= fam[0].fare + 1e-9


def test_mrt_on_cls_instance():
    pol = mrt_nested(cls_classes(), 40)
    open_ = [(f, fare, lim) for f, fare, lim in pol.open_classes()]
    assert open_ == [("1", 1200.0, 40.0), ("2", 800.0, 9.0)]
    closed = [c for c, b in zip(pol.ordered_classes, pol.booking_limits) if b < 1]
    assert [(c.family, c.fare) for c in closed] == [("1", 1000.0)]


def test_classic_on_cls_instance_opens_1000():
    pol = classic_nested(cls_classes(), 40)
    assert ("1", 1000.0, 9.0) in pol.open_classes()


def test_segmented_input_mrt_equals_classic():
    classes = [FareClass("a", 500.0, 20.0, 4.0), FareClass("b", 300.0, 30.0, 5.0), FareClass("c", 200.0, 25.0, 5.0)]
    m, c = mrt_nested(classes, 60), classic_nested(classes, 60)
    assert np.array_equal(m.protections, c.protections)
    assert np.array_equal(m.booking_limits, c.booking_limits)


def test_zero_capacity_closes_everything():
    pol = mrt_nested(cls_classes(), 0)
    assert pol.open_classes() == []


def test_negative_marginal_revenue_is_closed():
    fam = [FareClass("a", 200.0, 10.0), FareClass("a", 100.0, 1.0)]
    pol = mrt_nested(fam, 30)
    assert pol.n_open == 1
    assert pol.ordered_classes[-1].adjusted_fare < 0 and pol.booking_limits[-1] == 0


def test_single_fare_scenario_policy():
    s = make_scenario(30, [("a", [100.0], [4.0, 5.0], [2.0, 2.0])])
    for build in (mrt_emsrb_policy, classic_emsrb_policy):
        pol = build(s)
        assert set(pol.steps) == {0, 1}
        assert pol.steps[1].booking_limits.tolist() == [30.0]


def test_fare_classes_partition_demand():
    s = generate_synthetic(GeneratorSpec(horizon=5), 2)
    for t in range(s.horizon):
        cls = fare_classes_at(s, t)
        total = sum(c.mean_demand for c in cls)
        assert total == pytest.approx(s.demand_matrix()[:, :t + 1].sum(), rel=1e-12)
        assert all(c.std_demand == pytest.approx(c.mean_demand ** 0.5) for c in cls)


def test_fare_class_band_values():
    s = make_scenario(10, [("a", [100.0, 200.0, 300.0], [8.0], [2.0])])
    cls = sorted(fare_classes_at(s, 0), key=lambda c: c.fare)
    # shares of the exponential tail: [100,200) -> 1/2, [200,300) -> 1/4, [300,inf) -> 1/4
    assert [c.mean_demand for c in cls] == pytest.approx([4.0, 2.0, 2.0], rel=1e-12)


def test_policy_on_cls_scenario_has_one_step():
    s = cls_scenario()
    assert set(mrt_emsrb_policy(s).steps) == {0}
    with pytest.raises(ValueError):
        mrt_emsrb_policy(s, as_of_time=3)


def test_invalid_fare_class():
    with pytest.raises(ValueError):
        FareClass("a", 0.0, 1.0)
    with pytest.raises(ValueError):
        FareClass("a", 10.0, -1.0)
