"""Hot numeric kernels with two interchangeable backends.

The numba backend is used when numba imports and the environment variable
``LEGRM_DISABLE_NUMBA`` is unset or ``0``; otherwise the pure-numpy backend
is used.  Both expose the same functions:

``dual_solve(alpha, beta, capacity, tol, max_iter) -> (mu, iterations, status)``
``dual_solve_many(alpha, beta, capacities, tol, max_iter) -> (mu, value, status)``
``dual_value(alpha, beta, capacity, mu) -> float``
``greedy_search(alpha, beta, ladders, lens, prev, capacity, monotone, rel_tol, tol, max_iter)``

All ``alpha`` entries passed in must be strictly positive.
"""
import importlib
import os

from . import _numpy

OK = 0
NOT_CONVERGED = 1
INFEASIBLE = 1


def numba_requested() -> bool:
    return os.environ.get("LEGRM_DISABLE_NUMBA", "0").strip().lower() in ("", "0", "false", "no")


backend = _numpy
BACKEND = "numpy"
if numba_requested():
    try:
        backend = importlib.import_module(f"{__name__}._numba")
        BACKEND = "numba"
    except ImportError:  # numba missing: keep the numpy backend
        pass

dual_solve = backend.dual_solve
dual_solve_many = backend.dual_solve_many
dual_value = backend.dual_value
greedy_search = backend.greedy_search


def available_backends() -> dict:
    """Every importable backend module, keyed by name."""
    out = {"numpy": _numpy}
    try:
        from . import _numba as nb
    except ImportError:
        return out
    out["numba"] = nb
    return out
