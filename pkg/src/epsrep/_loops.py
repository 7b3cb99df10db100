"""Loop kernels in the numba-compatible subset of numpy.

This module is importable as plain Python. :mod:`epsrep.kernels` loads a second
copy of it with every function compiled by numba.
"""
import numpy as np

LP_OPTIMAL = 0
LP_INFEASIBLE = 1
LP_UNBOUNDED = 2
LP_ITERATION_LIMIT = 3
LP_NUMERICAL = 4

_TIE = 1e-12


# ---------------------------------------------------------------------------
# bounded-variable primal simplex
# ---------------------------------------------------------------------------

def _pivot(T, d, r, j):
    T[r, :] = T[r, :] / T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r, :])
    d -= d[j] * T[r, :]


def _reduced_costs(T, basis, cost):
    d = cost.copy()
    for i in range(T.shape[0]):
        d -= cost[basis[i]] * T[i, :]
    return d


def _refresh_basic(T, x, basis):
    m = T.shape[0]
    ntot = T.shape[1] - 1
    xn = x.copy()
    for i in range(m):
        xn[basis[i]] = 0.0
    for i in range(m):
        acc = T[i, ntot]
        for k in range(ntot):
            acc -= T[i, k] * xn[k]
        x[basis[i]] = acc


def _primal(T, x, basis, is_basic, lo, hi, cost, max_iter, bland_after, dtol, ptol):
    """Maximise ``cost @ x`` from a primal feasible basis. Returns (status, pivots)."""
    m = T.shape[0]
    ntot = T.shape[1] - 1
    d = _reduced_costs(T, basis, cost)
    pivots = 0
    degenerate = 0
    bland = False
    for _ in range(max_iter):
        j = -1
        best = 0.0
        for k in range(ntot):
            if is_basic[k] or hi[k] - lo[k] <= ptol:
                continue
            dk = d[k]
            if dk > dtol and x[k] < hi[k]:
                score = dk
            elif dk < -dtol and x[k] > lo[k]:
                score = -dk
            else:
                continue
            if bland:
                j = k
                break
            if score > best:
                best = score
                j = k
        if j < 0:
            return LP_OPTIMAL, pivots

        direction = 1.0 if d[j] > 0.0 else -1.0
        t = hi[j] - lo[j]
        r = -1
        rmag = 0.0
        for i in range(m):
            a = direction * T[i, j]
            bi = basis[i]
            if a > ptol:
                ti = (x[bi] - lo[bi]) / a
            elif a < -ptol:
                if hi[bi] == np.inf:
                    continue
                ti = (hi[bi] - x[bi]) / (-a)
            else:
                continue
            if ti < 0.0:
                ti = 0.0
            if ti < t - _TIE:
                t = ti
                r = i
                rmag = abs(a)
            elif r >= 0 and ti <= t + _TIE:
                if bland:
                    if bi < basis[r]:
                        r = i
                        rmag = abs(a)
                elif abs(a) > rmag:
                    r = i
                    rmag = abs(a)
        if t == np.inf:
            return LP_UNBOUNDED, pivots
        if t <= _TIE:
            degenerate += 1
            if degenerate >= bland_after:
                bland = True

        step = direction * t
        x[j] += step
        for i in range(m):
            x[basis[i]] -= step * T[i, j]
        if r < 0:
            x[j] = hi[j] if direction > 0.0 else lo[j]
            continue
        if abs(T[r, j]) < 1e-11:
            return LP_NUMERICAL, pivots
        leaving = basis[r]
        x[leaving] = lo[leaving] if direction * T[r, j] > 0.0 else hi[leaving]
        _pivot(T, d, r, j)
        is_basic[leaving] = False
        is_basic[j] = True
        basis[r] = j
        pivots += 1
    return LP_ITERATION_LIMIT, pivots


def bounded_simplex(A, b, c, lo, hi, max_iter, bland_after):
    """Solve ``max c@x  s.t.  A@x = b, lo <= x <= hi`` (``lo`` finite).

    Two-phase bounded-variable primal simplex on a dense tableau. Dantzig
    pricing switches to Bland's rule after ``bland_after`` degenerate pivots.
    Returns ``(status, x, pivots)``.
    """
    m, n = A.shape
    ntot = n + m
    dtol = 1e-9
    ptol = 1e-9
    x = np.zeros(ntot)
    x[:n] = lo
    resid = b - A @ x[:n]
    T = np.zeros((m, ntot + 1))
    for i in range(m):
        sgn = 1.0 if resid[i] >= 0.0 else -1.0
        T[i, :n] = sgn * A[i, :]
        T[i, n + i] = 1.0
        T[i, ntot] = sgn * b[i]
        x[n + i] = abs(resid[i])
    basis = np.arange(n, ntot)
    is_basic = np.zeros(ntot, dtype=np.bool_)
    is_basic[n:] = True
    lo_all = np.zeros(ntot)
    lo_all[:n] = lo
    hi_all = np.full(ntot, np.inf)
    hi_all[:n] = hi

    scale = 1.0
    for i in range(m):
        if abs(b[i]) > scale:
            scale = abs(b[i])
    feas_tol = 1e-9 * scale

    cost = np.zeros(ntot + 1)
    cost[n:ntot] = -1.0
    status, piv1 = _primal(T, x, basis, is_basic, lo_all, hi_all, cost,
                           max_iter, bland_after, dtol, ptol)
    _refresh_basic(T, x, basis)
    if status != LP_OPTIMAL:
        return status, x[:n].copy(), piv1
    if x[n:].sum() > feas_tol:
        return LP_INFEASIBLE, x[:n].copy(), piv1

    for k in range(n, ntot):
        hi_all[k] = 0.0
        if not is_basic[k]:
            x[k] = 0.0
    cost = np.zeros(ntot + 1)
    cost[:n] = c
    status, piv2 = _primal(T, x, basis, is_basic, lo_all, hi_all, cost,
                           max_iter, bland_after, dtol, ptol)
    _refresh_basic(T, x, basis)
    pivots = piv1 + piv2
    if status != LP_OPTIMAL:
        return status, x[:n].copy(), pivots
    res = A @ x[:n] - b
    worst = 0.0
    for i in range(m):
        if abs(res[i]) > worst:
            worst = abs(res[i])
    if worst > 1e-6 * scale:
        return LP_NUMERICAL, x[:n].copy(), pivots
    return LP_OPTIMAL, x[:n].copy(), pivots


# ---------------------------------------------------------------------------
# exhaustive enumeration of integer boxes
# ---------------------------------------------------------------------------

def _min_rest(A, lo, ub):
    m, n = A.shape
    rest = np.zeros((m, n + 1), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        for i in range(m):
            a = A[i, j]
            rest[i, j] = rest[i, j + 1] + (a * lo[j] if a >= 0 else a * ub[j])
    return rest


def enumerate_outcomes(A, b, C, lo, ub, max_nodes):
    """Depth-first walk of the box ``lo <= x <= ub`` pruned by ``A x <= b``.

    Returns ``(outcomes, nodes)`` where outcomes holds ``C x`` for every feasible
    ``x`` (with repetitions). ``nodes`` is ``-1`` when ``max_nodes`` was hit.
    """
    m, n = A.shape
    p = C.shape[0]
    rest = _min_rest(A, lo, ub)
    cap = 1024
    out = np.empty((cap, p), dtype=np.int64)
    count = 0
    lhs = np.zeros((n + 1, m), dtype=np.int64)
    zp = np.zeros((n + 1, p), dtype=np.int64)
    x = lo.copy()
    nodes = 0
    if n == 0:
        return out[:0], 0
    for i in range(m):
        if rest[i, 0] > b[i]:
            return out[:0], 0
    j = 0
    x[0] = lo[0] - 1
    while j >= 0:
        x[j] += 1
        if x[j] > ub[j]:
            j -= 1
            continue
        nodes += 1
        if nodes > max_nodes:
            return out[:count], -1
        ok = True
        for i in range(m):
            v = lhs[j, i] + A[i, j] * x[j]
            lhs[j + 1, i] = v
            if v + rest[i, j + 1] > b[i]:
                ok = False
                if A[i, j] >= 0:
                    x[j] = ub[j]
        if not ok:
            continue
        for k in range(p):
            zp[j + 1, k] = zp[j, k] + C[k, j] * x[j]
        if j == n - 1:
            if count == cap:
                cap *= 2
                grown = np.empty((cap, p), dtype=np.int64)
                grown[:count] = out[:count]
                out = grown
            out[count] = zp[n]
            count += 1
        else:
            j += 1
            x[j] = lo[j] - 1
    return out[:count], nodes


# ---------------------------------------------------------------------------
# nondominated filtering (maximisation)
# ---------------------------------------------------------------------------

def pareto_mask_sorted(Z):
    """Mask of nondominated rows of ``Z``.

    ``Z`` must hold distinct rows sorted lexicographically descending, so a
    dominating row always precedes the rows it dominates.
    """
    N, p = Z.shape
    keep = np.zeros(N, dtype=np.bool_)
    front = np.empty(N, dtype=np.int64)
    nf = 0
    for i in range(N):
        dominated = False
        for f in range(nf):
            fi = front[f]
            ge = True
            for k in range(p):
                if Z[fi, k] < Z[i, k]:
                    ge = False
                    break
            if ge:
                dominated = True
                break
        if not dominated:
            keep[i] = True
            front[nf] = i
            nf += 1
    return keep


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def _dist(u, v, t):
    if t == np.inf:
        best = 0.0
        for k in range(u.shape[0]):
            g = abs(u[k] - v[k])
            if g > best:
                best = g
        return best
    acc = 0.0
    for k in range(u.shape[0]):
        acc += abs(u[k] - v[k]) ** t
    if t == 1.0:
        return acc
    return acc ** (1.0 / t)


def coverage(N, R, t):
    """``max_{z in N} min_{z' in R} d_t(z, z')`` for float arrays."""
    worst = 0.0
    for i in range(N.shape[0]):
        near = np.inf
        for j in range(R.shape[0]):
            dij = _dist(N[i], R[j], t)
            if dij < near:
                near = dij
                if near <= worst:
                    break
        if near > worst:
            worst = near
    return worst


def uniformity(R, t):
    """Minimum pairwise ``d_t`` over distinct index pairs of ``R``."""
    best = np.inf
    for i in range(R.shape[0]):
        for j in range(i + 1, R.shape[0]):
            dij = _dist(R[i], R[j], t)
            if dij < best:
                best = dij
    return best
