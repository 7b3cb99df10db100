"""Hot numeric kernels with a numba path and a numpy path.

Every kernel exists in two flavours: ``*_nb`` (numba-compiled copy of
:mod:`epsrep._loops`) and ``*_np`` (plain numpy). The unsuffixed names are bound
to one flavour according to :mod:`epsrep._accel`; both stay importable so the
test-suite and ``benchmarks/bench_kernels.py`` can compare them.
"""
import importlib.util
import sys

import numpy as np

from . import _loops
from ._accel import HAVE_NUMBA, njit, pick
from ._loops import (  # noqa: F401
    LP_INFEASIBLE,
    LP_ITERATION_LIMIT,
    LP_NUMERICAL,
    LP_OPTIMAL,
    LP_UNBOUNDED,
)


def _compiled_clone():
    name = __package__ + "._loops_nb"
    if name in sys.modules:
        return sys.modules[name]
    spec = importlib.util.spec_from_file_location(name, _loops.__file__)
    mod = importlib.util.module_from_spec(spec)
    sys.modules[name] = mod
    spec.loader.exec_module(mod)
    if HAVE_NUMBA:
        for attr, obj in list(vars(mod).items()):
            if callable(obj) and getattr(obj, "__module__", None) == name:
                setattr(mod, attr, njit(obj))
    return mod


_nb = _compiled_clone()

bounded_simplex_nb = _nb.bounded_simplex
enumerate_outcomes_nb = _nb.enumerate_outcomes
pareto_mask_sorted_nb = _nb.pareto_mask_sorted
coverage_nb = _nb.coverage
uniformity_nb = _nb.uniformity

# the simplex operates on tiny dense tableaux: the numpy flavour is the same
# source run uncompiled, its row operations already vectorised
bounded_simplex_np = _loops.bounded_simplex


def enumerate_outcomes_np(A, b, C, lo, ub, max_nodes):
    """Level-by-level vectorised enumeration of ``lo <= x <= ub, A x <= b``.

    Returns ``(outcomes, nodes)`` like the depth-first kernel; ``nodes`` is
    ``-1`` once more than ``max_nodes`` partial assignments were generated.
    """
    m, n = A.shape
    p = C.shape[0]
    rest = _loops._min_rest(A, lo, ub)
    if n == 0 or np.any(rest[:, 0] > b):
        return np.empty((0, p), dtype=np.int64), 0
    lhs = np.zeros((1, m), dtype=np.int64)
    zp = np.zeros((1, p), dtype=np.int64)
    nodes = 0
    for j in range(n):
        vals = np.arange(lo[j], ub[j] + 1, dtype=np.int64)
        nodes += lhs.shape[0] * vals.size
        if nodes > max_nodes:
            return zp, -1
        lhs = (lhs[:, None, :] + vals[None, :, None] * A[:, j][None, None, :]).reshape(-1, m)
        zp = (zp[:, None, :] + vals[None, :, None] * C[:, j][None, None, :]).reshape(-1, p)
        ok = np.all(lhs + rest[:, j + 1] <= b, axis=1)
        lhs = lhs[ok]
        zp = zp[ok]
    return zp, nodes


def pareto_mask_sorted_np(Z, chunk=2048):
    """Vectorised counterpart of :func:`epsrep._loops.pareto_mask_sorted`."""
    N, p = Z.shape
    keep = np.zeros(N, dtype=bool)
    front = np.empty((0, p), dtype=Z.dtype)
    for s in range(0, N, chunk):
        blk = Z[s:s + chunk]
        dom = np.zeros(blk.shape[0], dtype=bool)
        for f0 in range(0, front.shape[0], 512):
            fb = front[f0:f0 + 512]
            dom |= np.all(fb[None, :, :] >= blk[:, None, :], axis=2).any(axis=1)
        added = []
        for c in np.flatnonzero(~dom):
            if added and np.all(blk[added] >= blk[c], axis=1).any():
                continue
            added.append(c)
            keep[s + c] = True
        if added:
            front = np.vstack([front, blk[added]])
    return keep


def _pairwise_np(U, V, t):
    G = np.abs(U[:, None, :] - V[None, :, :])
    if t == np.inf:
        return G.max(axis=2)
    if t == 1.0:
        return G.sum(axis=2)
    return (G ** t).sum(axis=2) ** (1.0 / t)


def coverage_np(N, R, t, chunk=1024):
    worst = 0.0
    for s in range(0, N.shape[0], chunk):
        near = _pairwise_np(N[s:s + chunk], R, t).min(axis=1)
        worst = max(worst, float(near.max()))
    return worst


def uniformity_np(R, t):
    if R.shape[0] < 2:
        return np.inf
    D = _pairwise_np(R, R, t)
    return float(D[np.triu_indices(R.shape[0], k=1)].min())


bounded_simplex = pick(bounded_simplex_nb, bounded_simplex_np)
enumerate_outcomes = pick(enumerate_outcomes_nb, enumerate_outcomes_np)
pareto_mask_sorted = pick(pareto_mask_sorted_nb, pareto_mask_sorted_np)
coverage = pick(coverage_nb, coverage_np)
uniformity = pick(uniformity_nb, uniformity_np)
