"""Time the numba and numpy kernel backends on generated scenarios.

Run ``python3 benchmarks/bench_kernels.py [--repeat N]``.  The first numba
call of each kernel includes compilation and is reported separately.
"""
import argparse
import time

import numpy as np

from legrm.demand import curve_arrays
from legrm.discrete import SearchConfig, _layout
from legrm.kernels import available_backends
from legrm.relaxed import DEFAULT_MAX_ITER, DEFAULT_TOL
from legrm.scenario import PRESETS, generate_synthetic


def _time(fn, repeat):
    t0 = time.perf_counter()
    fn()
    first = time.perf_counter() - t0
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - t0)
    return first, float(np.median(runs))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = available_backends()
    print(f"{'preset':12s} {'kernel':16s} {'backend':8s} {'first [ms]':>11s} {'median [ms]':>12s}")
    for preset in ("standard", "demand-rich", "demand-poor"):
        s = generate_synthetic(PRESETS[preset], 1)
        alpha, beta = curve_arrays(s)
        a, b = alpha[alpha > 0].ravel(), beta[alpha > 0].ravel()
        caps = np.linspace(1.0, 2.0 * s.capacity, 2000)
        lay = _layout(s, None, SearchConfig())
        cases = {
            "dual_solve_many": lambda m: m.dual_solve_many(a, b, caps, DEFAULT_TOL, DEFAULT_MAX_ITER),
            "greedy_search": lambda m: m.greedy_search(lay.alpha, lay.beta, lay.ladders, lay.lens, lay.prev,
                                                       float(s.capacity), False, 1e-9, DEFAULT_TOL,
                                                       DEFAULT_MAX_ITER),
        }
        for kname, call in cases.items():
            for bname, mod in backends.items():
                first, med = _time(lambda: call(mod), args.repeat)
                print(f"{preset:12s} {kname:16s} {bname:8s} {1e3 * first:11.2f} {1e3 * med:12.2f}")


if __name__ == "__main__":
    main()
