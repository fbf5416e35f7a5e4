import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import scenarios
from legrm import kernels
from legrm.discrete import SearchConfig, _layout
from legrm.relaxed import DEFAULT_MAX_ITER, DEFAULT_TOL
from legrm.scenario import GeneratorSpec, generate_synthetic

BACKENDS = kernels.available_backends()
needs_numba = pytest.mark.skipif("numba" not in BACKENDS, reason="numba not installed")

cells = st.lists(st.tuples(st.floats(1e-3, 1e3), st.floats(1e-4, 0.1)), min_size=1, max_size=12)


def test_default_backend_is_numba_when_available():
    assert kernels.BACKEND == ("numba" if "numba" in BACKENDS else "numpy")


@pytest.mark.parametrize("value,expected", [("", "numba"), ("0", "numba"), ("1", "numpy"), ("yes", "numpy")])
def test_env_flag_selects_backend(value, expected):
    if expected == "numba" and "numba" not in BACKENDS:
        pytest.skip("numba not installed")
    env = dict(os.environ, LEGRM_DISABLE_NUMBA=value)
    out = subprocess.run([sys.executable, "-c", "from legrm import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


@needs_numba
@given(cells, st.floats(0.5, 5e3))
def test_dual_solve_backends_agree(cs, cap):
    a = np.array([c[0] for c in cs])
    b = np.array([c[1] for c in cs])
    nb, npy = BACKENDS["numba"], BACKENDS["numpy"]
    m1, _, s1 = nb.dual_solve(a, b, cap, DEFAULT_TOL, DEFAULT_MAX_ITER)
    m2, _, s2 = npy.dual_solve(a, b, cap, DEFAULT_TOL, DEFAULT_MAX_ITER)
    assert s1 == s2 == kernels.OK
    assert m1 == pytest.approx(m2, rel=1e-9, abs=1e-9)
    assert nb.dual_value(a, b, cap, m1) == pytest.approx(npy.dual_value(a, b, cap, m2), rel=1e-12)


@needs_numba
@given(cells, st.lists(st.floats(0.5, 5e3), min_size=1, max_size=6))
def test_dual_solve_many_matches_single(cs, caps):
    a = np.array([c[0] for c in cs])
    b = np.array([c[1] for c in cs])
    caps = np.array(caps)
    for mod in BACKENDS.values():
        mu, val, st_ = mod.dual_solve_many(a, b, caps, DEFAULT_TOL, DEFAULT_MAX_ITER)
        assert np.all(st_ == kernels.OK)
        for k, c in enumerate(caps):
            m, _, _ = mod.dual_solve(a, b, c, DEFAULT_TOL, DEFAULT_MAX_ITER)
            assert mu[k] == pytest.approx(m, rel=1e-12, abs=1e-12)
            assert val[k] == pytest.approx(mod.dual_value(a, b, c, m), rel=1e-12)


def _greedy(mod, lay, cap, monotone):
    return mod.greedy_search(lay.alpha, lay.beta, lay.ladders, lay.lens, lay.prev, float(cap), monotone,
                             1e-9, DEFAULT_TOL, DEFAULT_MAX_ITER)


@needs_numba
@given(scenarios(max_products=3, max_horizon=4, max_prices=4), st.booleans())
def test_greedy_backends_agree(s, monotone):
    lay = _layout(s, None, SearchConfig(monotone_prices=monotone))
    if not lay.cells:
        return
    c1, s1 = _greedy(BACKENDS["numba"], lay, s.capacity, monotone)
    c2, s2 = _greedy(BACKENDS["numpy"], lay, s.capacity, monotone)
    assert s1 == s2
    if s1 == kernels.OK:
        assert np.array_equal(c1, c2)


@needs_numba
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_greedy_backends_agree_on_full_size(seed):
    s = generate_synthetic(GeneratorSpec(), seed)
    lay = _layout(s, None, SearchConfig())
    c1, _ = _greedy(BACKENDS["numba"], lay, s.capacity, False)
    c2, _ = _greedy(BACKENDS["numpy"], lay, s.capacity, False)
    assert np.array_equal(c1, c2)


def test_greedy_flags_infeasible():
    lay = _layout(generate_synthetic(GeneratorSpec(n_products=1, horizon=2), 1), None, SearchConfig())
    for mod in BACKENDS.values():
        choice, status = _greedy(mod, lay, 1e-6, False)
        assert status == kernels.INFEASIBLE and np.all(choice == -1)
