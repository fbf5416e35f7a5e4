"""Numba-compiled kernels (scalar loops, no temporaries)."""
import numpy as np
from numba import njit

OK = 0
NOT_CONVERGED = 1
INFEASIBLE = 1


@njit(cache=True)
def _log_demand(la, beta, start, mu):
    # la = log(alpha) - 1, precomputed by the caller
    n = la.shape[0]
    m = -np.inf
    for j in range(start, n):
        a = la[j] - beta[j] * mu
        if a > m:
            m = a
    s = 0.0
    sb = 0.0
    for j in range(start, n):
        w = np.exp(la[j] - beta[j] * mu - m)
        s += w
        sb += beta[j] * w
    return m + np.log(s), -sb / s


@njit(cache=True)
def _solve(la, beta, start, capacity, tol, max_iter):
    log_c = np.log(capacity)
    mu = 0.0
    lo = 0.0
    hi = np.inf
    h, dh = _log_demand(la, beta, start, mu)
    h -= log_c
    if h <= 0.0:
        return 0.0, 0, OK
    for it in range(1, max_iter + 1):
        new = mu - h / dh
        if not np.isfinite(new) or new <= lo or new >= hi:
            if np.isfinite(hi):
                new = 0.5 * (lo + hi)
            else:
                new = 2.0 * lo + 1.0
        mu = new
        h, dh = _log_demand(la, beta, start, mu)
        h -= log_c
        if abs(np.expm1(h)) <= tol:
            return mu, it, OK
        if h > 0.0:
            lo = mu
        else:
            hi = mu
    return mu, max_iter, NOT_CONVERGED


@njit(cache=True)
def _value(alpha, beta, start, capacity, mu):
    v = mu * capacity
    for j in range(start, alpha.shape[0]):
        v += alpha[j] / beta[j] * np.exp(-beta[j] * mu - 1.0)
    return v


@njit(cache=True)
def dual_value(alpha, beta, capacity, mu):
    return _value(alpha, beta, 0, capacity, mu)


@njit(cache=True)
def dual_solve(alpha, beta, capacity, tol, max_iter):
    return _solve(np.log(alpha) - 1.0, beta, 0, capacity, tol, max_iter)


@njit(cache=True)
def dual_solve_many(alpha, beta, capacities, tol, max_iter):
    k = capacities.shape[0]
    mu = np.zeros(k)
    value = np.zeros(k)
    status = np.zeros(k, dtype=np.int64)
    la = np.log(alpha) - 1.0
    for i in range(k):
        m, _, st = _solve(la, beta, 0, capacities[i], tol, max_iter)
        mu[i] = m
        status[i] = st
        value[i] = _value(alpha, beta, 0, capacities[i], m)
    return mu, value, status


@njit(cache=True)
def greedy_search(alpha, beta, ladders, lens, prev, capacity, monotone, rel_tol, tol, max_iter):
    n = alpha.shape[0]
    choice = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return choice, OK
    kmax = ladders.shape[1]
    la = np.log(alpha) - 1.0
    dem = np.zeros((n, kmax))
    rev = np.zeros((n, kmax))
    for k in range(n):
        for c in range(lens[k]):
            dem[k, c] = alpha[k] * np.exp(-beta[k] * ladders[k, c])
            rev[k, c] = ladders[k, c] * dem[k, c]
    min_rest = np.zeros(n)
    acc = 0.0
    for k in range(n - 1, -1, -1):
        min_rest[k] = acc
        acc += dem[k, lens[k] - 1]
    slack = 1e-9 * max(capacity, 1.0)

    cum_r = np.zeros(n + 1)
    cum_d = np.zeros(n + 1)
    cand = np.full((n, kmax), -1, dtype=np.int64)
    n_cand = np.zeros(n, dtype=np.int64)
    pos = np.zeros(n, dtype=np.int64)
    built = np.zeros(n, dtype=np.bool_)
    bounds = np.zeros(kmax)
    ids = np.zeros(kmax, dtype=np.int64)

    k = 0
    while 0 <= k < n:
        if not built[k]:
            m = 0
            for c in range(lens[k]):
                new_d = cum_d[k] + dem[k, c]
                if new_d + min_rest[k] > capacity + slack:
                    continue
                if monotone and prev[k] >= 0:
                    floor = ladders[prev[k], choice[prev[k]]]
                    if ladders[k, c] < floor * (1.0 - 1e-12):
                        continue
                b = cum_r[k] + rev[k, c]
                if k + 1 < n:
                    residual = capacity - new_d
                    if residual <= 0.0:
                        continue
                    mu, _, _ = _solve(la, beta, k + 1, residual, tol, max_iter)
                    b += _value(alpha, beta, k + 1, residual, mu)
                ids[m] = c
                bounds[m] = b
                m += 1
            # Selection order: best bound first, ties (within rel_tol) to the
            # higher price.
            for slot in range(m):
                best = -np.inf
                for i in range(m):
                    if ids[i] >= 0 and bounds[i] > best:
                        best = bounds[i]
                thr = best - rel_tol * abs(best)
                pick = -1
                for i in range(m):
                    if ids[i] >= 0 and bounds[i] >= thr and (pick < 0 or ids[i] > ids[pick]):
                        pick = i
                cand[k, slot] = ids[pick]
                ids[pick] = -1
            n_cand[k] = m
            pos[k] = 0
            built[k] = True
        if pos[k] >= n_cand[k]:
            built[k] = False
            k -= 1
            continue
        c = cand[k, pos[k]]
        pos[k] += 1
        choice[k] = c
        cum_r[k + 1] = cum_r[k] + rev[k, c]
        cum_d[k + 1] = cum_d[k] + dem[k, c]
        k += 1
    if k < 0:
        return np.full(n, -1, dtype=np.int64), INFEASIBLE
    return choice, OK
