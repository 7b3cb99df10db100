"""LP relaxation and integer solves.

The bundled :class:`BranchAndBound` backend wraps the bounded-variable simplex
kernel in a best-bound branch-and-bound search. Any object with ``solve_lp``
and ``solve_ip`` methods following the same contract can stand in for it;
:class:`ScipyBackend` (HiGHS through scipy) is provided as a cross-check.
"""
import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol, Sequence

import numpy as np

from . import kernels
from .errors import NodeBudgetExceeded, NumericalInstabilityError, UnboundedBoxError

INT_TOL = 1e-6
PRUNE_TOL = 1e-8
BLAND_AFTER = 1000

SENSES = ("<=", "=", ">=")


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LinearSubproblem:
    """``max c x`` over mixed-sense rows and per-variable bounds.

    ``upper`` may contain ``inf``; ``lower`` must be finite. ``integer`` flags
    the variables branch-and-bound has to make integral.
    """

    objective: np.ndarray
    rows: np.ndarray
    senses: tuple
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    integer: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        n = c.shape[0]
        A = np.asarray(self.rows, dtype=float).reshape(-1, n)
        b = np.asarray(self.rhs, dtype=float).reshape(-1)
        senses = tuple(self.senses)
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        up = np.asarray(self.upper, dtype=float).reshape(-1)
        integer = np.asarray(self.integer, dtype=bool).reshape(-1)
        if A.shape[0] != b.shape[0] or len(senses) != b.shape[0]:
            raise ValueError("rows, senses and rhs must have the same length")
        if lo.shape[0] != n or up.shape[0] != n or integer.shape[0] != n:
            raise ValueError("bounds and integrality flags need one entry per variable")
        if any(s not in SENSES for s in senses):
            raise ValueError(f"row senses must be among {SENSES}")
        if not np.all(np.isfinite(lo)):
            raise ValueError("lower bounds must be finite")
        for name, arr in (("objective", c), ("rows", A), ("rhs", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "rows", A)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "integer", integer)

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    def with_bounds(self, lower, upper) -> "LinearSubproblem":
        return LinearSubproblem(self.objective, self.rows, self.senses, self.rhs,
                                lower, upper, self.integer)

    def standard_form(self):
        """Equality form ``A' x' = b`` with one nonnegative slack per inequality."""
        m, n = self.rows.shape
        ineq = [i for i, s in enumerate(self.senses) if s != "="]
        A = np.zeros((m, n + len(ineq)))
        A[:, :n] = self.rows
        for k, i in enumerate(ineq):
            A[i, n + k] = 1.0 if self.senses[i] == "<=" else -1.0
        c = np.concatenate([self.objective, np.zeros(len(ineq))])
        lo = np.concatenate([self.lower, np.zeros(len(ineq))])
        hi = np.concatenate([self.upper, np.full(len(ineq), np.inf)])
        return A, self.rhs.copy(), c, lo, hi


@dataclass
class SolveOutcome:
    status: Status
    x: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    nodes: int = 0
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class Backend(Protocol):
    def solve_lp(self, sub: LinearSubproblem) -> SolveOutcome: ...

    def solve_ip(self, sub: LinearSubproblem) -> SolveOutcome: ...


def derive_integer_bounds(sub: LinearSubproblem) -> np.ndarray:
    """Tighten infinite upper bounds of integer variables from ``<=`` rows.

    Only rows where the variable has a positive coefficient and every other
    term has a finite minimum are used.
    """
    up = sub.upper.copy()
    lo = sub.lower
    le_rows = []
    for i, sense in enumerate(sub.senses):
        if sense in ("<=", "="):
            le_rows.append((sub.rows[i], sub.rhs[i]))
        if sense in (">=", "="):
            le_rows.append((-sub.rows[i], -sub.rhs[i]))
    for j in np.flatnonzero(sub.integer & ~np.isfinite(up)):
        others = np.arange(sub.num_vars) != j
        for row, rhs in le_rows:
            if row[j] <= 0:
                continue
            r = row[others]
            with np.errstate(invalid="ignore"):
                mins = np.where(r >= 0, r * lo[others], r * up[others])
            mins = np.where(r == 0, 0.0, mins)
            if not np.all(np.isfinite(mins)):
                continue
            up[j] = min(up[j], math.floor((rhs - mins.sum()) / row[j] + INT_TOL))
    missing = np.flatnonzero(sub.integer & ~np.isfinite(up))
    if missing.size:
        raise UnboundedBoxError(f"integer variables {missing.tolist()} lack finite bounds")
    return up


@dataclass
class BranchAndBound:
    """Bundled exact backend.

    Best-bound node selection, branching on the most fractional integer
    variable with ties broken by lowest index. Fully deterministic.
    """

    max_nodes: int = 10**6
    bland_after: int = BLAND_AFTER
    stats: dict = field(default_factory=lambda: {"lp": 0, "ip": 0, "nodes": 0, "pivots": 0})

    def _lp(self, A, b, c, lo, hi):
        n = A.shape[1]
        if np.any(lo > hi + 1e-9):
            return Status.INFEASIBLE, None, 0
        max_iter = 50 * (A.shape[0] + n) + 2000
        code, x, pivots = kernels.bounded_simplex(A, b, c, lo, hi, max_iter, self.bland_after)
        if code == kernels.LP_OPTIMAL:
            return Status.OPTIMAL, x, pivots
        if code == kernels.LP_INFEASIBLE:
            return Status.INFEASIBLE, None, pivots
        if code == kernels.LP_UNBOUNDED:
            return Status.UNBOUNDED, None, pivots
        raise NumericalInstabilityError(
            "simplex safeguards tripped (iteration limit or residual check); rescale the model")

    def solve_lp(self, sub: LinearSubproblem) -> SolveOutcome:
        A, b, c, lo, hi = sub.standard_form()
        status, x, pivots = self._lp(A, b, c, lo, hi)
        self.stats["lp"] += 1
        self.stats["pivots"] += pivots
        if status is not Status.OPTIMAL:
            return SolveOutcome(status, pivots=pivots)
        n = sub.num_vars
        return SolveOutcome(status, x[:n].copy(), float(sub.objective @ x[:n]), 0, pivots)

    def solve_ip(self, sub: LinearSubproblem) -> SolveOutcome:
        n = sub.num_vars
        upper = derive_integer_bounds(sub)
        lo0 = sub.lower.copy()
        lo0[sub.integer] = np.ceil(lo0[sub.integer] - INT_TOL)
        upper[sub.integer] = np.floor(upper[sub.integer] + INT_TOL)
        A, b, c, lo, hi = sub.with_bounds(lo0, upper).standard_form()
        ints = np.flatnonzero(sub.integer)
        self.stats["ip"] += 1

        best_x, best_val = None, -math.inf
        nodes = pivots = 0
        counter = 0
        heap = []

        def push(lo_, hi_):
            nonlocal nodes, pivots, counter
            nodes += 1
            if nodes > self.max_nodes:
                raise NodeBudgetExceeded(f"branch-and-bound exceeded {self.max_nodes} nodes")
            status, x, piv = self._lp(A, b, c, lo_, hi_)
            pivots += piv
            if status is Status.UNBOUNDED:
                return status
            if status is Status.OPTIMAL:
                val = float(c @ x)
                counter += 1
                heapq.heappush(heap, (-val, counter, x, lo_, hi_))
            return status

        if push(lo, hi) is Status.UNBOUNDED:
            self._account(nodes, pivots)
            return SolveOutcome(Status.UNBOUNDED, nodes=nodes, pivots=pivots)

        while heap:
            neg, _, x, lo_, hi_ = heapq.heappop(heap)
            bound = -neg
            if best_x is not None and bound <= best_val + PRUNE_TOL * max(1.0, abs(best_val)):
                break
            xi = x[ints]
            frac = np.abs(xi - np.round(xi))
            if ints.size == 0 or frac.max() <= INT_TOL:
                best_x, best_val = x, bound
                continue
            dist = np.minimum(xi - np.floor(xi), np.ceil(xi) - xi)
            j = ints[int(np.argmax(dist))]
            v = x[j]
            hi_dn = hi_.copy()
            hi_dn[j] = math.floor(v)
            lo_up = lo_.copy()
            lo_up[j] = math.ceil(v)
            push(lo_, hi_dn)
            push(lo_up, hi_)

        self._account(nodes, pivots)
        if best_x is None:
            return SolveOutcome(Status.INFEASIBLE, nodes=nodes, pivots=pivots)
        x = best_x[:n].copy()
        x[sub.integer] = np.round(x[sub.integer])
        return SolveOutcome(Status.OPTIMAL, x, float(sub.objective @ x), nodes, pivots)

    def _account(self, nodes, pivots):
        self.stats["nodes"] += nodes
        self.stats["pivots"] += pivots


class ScipyBackend:
    """HiGHS via :func:`scipy.optimize.milp`; used as an independent oracle."""

    def __init__(self, time_limit: Optional[float] = None):
        self.time_limit = time_limit

    def _solve(self, sub: LinearSubproblem, integral: bool) -> SolveOutcome:
        from scipy.optimize import Bounds, LinearConstraint, milp

        lo_r = np.where(np.array(sub.senses) == "<=", -np.inf, sub.rhs)
        hi_r = np.where(np.array(sub.senses) == ">=", np.inf, sub.rhs)
        cons = [LinearConstraint(sub.rows, lo_r, hi_r)] if sub.rows.shape[0] else []
        options = {"time_limit": self.time_limit} if self.time_limit else {}
        res = milp(-sub.objective, constraints=cons,
                   integrality=sub.integer.astype(int) if integral else None,
                   bounds=Bounds(sub.lower, sub.upper), options=options)
        if res.status == 0:
            x = res.x.copy()
            if integral:
                x[sub.integer] = np.round(x[sub.integer])
            return SolveOutcome(Status.OPTIMAL, x, float(sub.objective @ x))
        if res.status == 2:
            return SolveOutcome(Status.INFEASIBLE)
        if res.status == 3:
            return SolveOutcome(Status.UNBOUNDED)
        raise NumericalInstabilityError(f"HiGHS stopped without a verdict: {res.message}")

    def solve_lp(self, sub: LinearSubproblem) -> SolveOutcome:
        return self._solve(sub, False)

    def solve_ip(self, sub: LinearSubproblem) -> SolveOutcome:
        return self._solve(sub, True)


def make_backend(name: str = "bnb", **kwargs):
    if name in ("bnb", "builtin"):
        return BranchAndBound(**kwargs)
    if name in ("scipy", "highs"):
        return ScipyBackend(**kwargs)
    raise ValueError(f"unknown backend {name!r}")


def simple_subproblem(c: Sequence[float], rows, senses, rhs, lower=None, upper=None,
                      integer=None) -> LinearSubproblem:
    """Convenience constructor with defaults ``x >= 0``, no upper bound, all integer."""
    n = len(c)
    return LinearSubproblem(
        np.asarray(c, float), np.asarray(rows, float).reshape(-1, n), tuple(senses),
        np.asarray(rhs, float),
        np.zeros(n) if lower is None else lower,
        np.full(n, np.inf) if upper is None else upper,
        np.ones(n, bool) if integer is None else integer,
    )
