"""Pure-numpy kernels.

Same contracts as :mod:`legrm.kernels._numba`; the greedy search batches all
children of a node into a single vectorized dual solve instead of looping.
"""
import numpy as np

OK = 0
NOT_CONVERGED = 1
INFEASIBLE = 1


def _log_demand(log_alpha, beta, mu):
    # log of sum_j alpha_j * exp(-beta_j * mu - 1) and its derivative in mu,
    # evaluated with a max shift so that large mu never underflows to log(0).
    a = log_alpha - 1.0 - beta * mu
    m = a.max(axis=-1, keepdims=True)
    w = np.exp(a - m)
    s = w.sum(axis=-1)
    return m[..., 0] + np.log(s), -(beta * w).sum(axis=-1) / s


def dual_value(alpha, beta, capacity, mu):
    """``mu * C + sum(alpha / beta * exp(-beta * mu - 1))``."""
    return mu * capacity + np.sum(alpha / beta * np.exp(-beta * mu - 1.0))


def dual_solve(alpha, beta, capacity, tol, max_iter):
    """Minimize the capacity dual over ``mu >= 0``.

    ``alpha`` must be strictly positive.  Newton's method is applied to
    ``log D(mu) - log C`` where ``D`` is the demand at the inner maximizer;
    this function is convex and decreasing so iterates started at 0 increase
    monotonically to the root.  A bracket is kept as a safeguard and a step
    leaving it is replaced by bisection.

    Returns ``(mu, iterations, status)``.
    """
    log_alpha = np.log(alpha)
    log_c = np.log(capacity)
    mu, lo, hi = 0.0, 0.0, np.inf
    h, dh = _log_demand(log_alpha, beta, mu)
    h -= log_c
    if h <= 0.0:
        return 0.0, 0, OK
    for it in range(1, max_iter + 1):
        step = -h / dh
        new = mu + step
        if not np.isfinite(new) or new <= lo or new >= hi:
            new = 0.5 * (lo + hi) if np.isfinite(hi) else 2.0 * lo + 1.0
        mu = new
        h, dh = _log_demand(log_alpha, beta, mu)
        h -= log_c
        if abs(np.expm1(h)) <= tol:
            return mu, it, OK
        if h > 0.0:
            lo = mu
        else:
            hi = mu
    return mu, max_iter, NOT_CONVERGED


def dual_solve_many(alpha, beta, capacities, tol, max_iter):
    """Solve the dual for one cell set under several capacities at once.

    Returns ``(mu, value, status)`` arrays aligned with ``capacities``.
    """
    capacities = np.asarray(capacities, dtype=float)
    k = capacities.shape[0]
    log_alpha = np.log(alpha)[None, :]
    b = beta[None, :]
    log_c = np.log(capacities)
    mu = np.zeros(k)
    lo = np.zeros(k)
    hi = np.full(k, np.inf)
    h, dh = _log_demand(log_alpha, b, mu[:, None])
    h = h - log_c
    active = h > 0.0
    status = np.zeros(k, dtype=np.int64)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        new = mu[idx] - h[idx] / dh[idx]
        bad = ~np.isfinite(new) | (new <= lo[idx]) | (new >= hi[idx])
        if bad.any():
            fallback = np.where(np.isfinite(hi[idx]), 0.5 * (lo[idx] + hi[idx]), 2.0 * lo[idx] + 1.0)
            new = np.where(bad, fallback, new)
        mu[idx] = new
        hn, dhn = _log_demand(log_alpha, b, new[:, None])
        hn = hn - log_c[idx]
        h[idx], dh[idx] = hn, dhn
        done = np.abs(np.expm1(hn)) <= tol
        lo[idx] = np.where(hn > 0.0, new, lo[idx])
        hi[idx] = np.where(hn <= 0.0, new, hi[idx])
        active[idx[done]] = False
    status[active] = NOT_CONVERGED
    value = mu * capacities + np.sum(
        (alpha / beta)[None, :] * np.exp(-b * mu[:, None] - 1.0), axis=1
    )
    return mu, value, status


def greedy_search(alpha, beta, ladders, lens, prev, capacity, monotone, rel_tol, tol, max_iter):
    """Bound-guided depth-first descent with backtracking.

    Cells are visited in array order.  ``ladders[k, :lens[k]]`` holds the
    candidate prices of cell ``k`` in increasing order; ``prev[k]`` is the
    index of the previously visited cell of the same product, or -1.

    Returns ``(choice, status)`` where ``choice[k]`` indexes into
    ``ladders[k]``.  ``status`` is 1 when no feasible completion exists.
    """
    n = alpha.shape[0]
    choice = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return choice, OK
    kmax = ladders.shape[1]
    cols = np.arange(kmax)
    valid = cols[None, :] < lens[:, None]
    safe_ladders = np.where(valid, ladders, 0.0)
    dem = np.where(valid, alpha[:, None] * np.exp(-beta[:, None] * safe_ladders), 0.0)
    rev = safe_ladders * dem
    dmin = dem[np.arange(n), lens - 1]
    # Least demand the cells after k can induce (all at their top price).
    min_rest = np.concatenate([np.cumsum(dmin[::-1])[::-1][1:], [0.0]])
    slack = 1e-9 * max(capacity, 1.0)

    cum_r = np.zeros(n + 1)
    cum_d = np.zeros(n + 1)
    cand = [None] * n
    k = 0
    while 0 <= k < n:
        if cand[k] is None:
            cand[k] = _order_children(
                k, alpha, beta, safe_ladders, dem, rev, lens, prev, choice, cum_r[k], cum_d[k],
                min_rest[k], capacity, slack, monotone, rel_tol, tol, max_iter,
            )
        if not cand[k]:
            cand[k] = None
            k -= 1
            continue
        c = cand[k].pop(0)
        choice[k] = c
        cum_r[k + 1] = cum_r[k] + rev[k, c]
        cum_d[k + 1] = cum_d[k] + dem[k, c]
        k += 1
    if k < 0:
        return np.full(n, -1, dtype=np.int64), INFEASIBLE
    return choice, OK


def _order_children(k, alpha, beta, ladders, dem, rev, lens, prev, choice, fixed_r, fixed_d,
                    min_rest, capacity, slack, monotone, rel_tol, tol, max_iter):
    m = lens[k]
    cs = np.arange(m)
    new_d = fixed_d + dem[k, :m]
    ok = new_d + min_rest <= capacity + slack
    if monotone and prev[k] >= 0:
        floor = ladders[prev[k], choice[prev[k]]]
        ok &= ladders[k, :m] >= floor * (1.0 - 1e-12)
    cs = cs[ok]
    if cs.size == 0:
        return []
    residual = capacity - new_d[cs]
    bounds = fixed_r + rev[k, cs]
    if k + 1 < alpha.shape[0]:
        keep = residual > 0.0
        cs, residual, bounds = cs[keep], residual[keep], bounds[keep]
        if cs.size == 0:
            return []
        _, value, _ = dual_solve_many(alpha[k + 1:], beta[k + 1:], residual, tol, max_iter)
        bounds = bounds + value
    return _tie_sorted(list(cs), list(bounds), rel_tol)


def _tie_sorted(cs, bounds, rel_tol):
    # Best bound first; bounds within rel_tol of the best count as tied and
    # the tie goes to the higher price (larger ladder index).
    out = []
    while cs:
        best = max(bounds)
        thr = best - rel_tol * abs(best)
        j = max((i for i in range(len(cs)) if bounds[i] >= thr), key=lambda i: cs[i])
        out.append(int(cs[j]))
        del cs[j], bounds[j]
    return out
