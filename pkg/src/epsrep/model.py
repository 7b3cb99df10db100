"""Multi-objective integer linear programs, dominance and Pareto filtering.

Canonical form: every objective is maximised, every constraint is ``<=`` and
all coefficients are integers. Outcome vectors are plain tuples of ints.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import BudgetExceededError, DimensionError, UnboundedBoxError

Outcome = tuple


def _int_array(values, name, ndim):
    arr = np.asarray(values)
    if arr.size == 0:
        arr = arr.astype(np.int64)
    if arr.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ValueError(f"{name} must hold integer coefficients")
    out = arr.astype(np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class MOILPProblem:
    """``max C x  s.t.  A x <= b,  lower <= x <= upper,  x integer``.

    ``upper`` entries may be ``None``, meaning the bound is implied by the
    constraints (see :meth:`box`).
    """

    objectives: np.ndarray
    constraints: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray = None
    upper: tuple = None
    name: str = ""

    def __post_init__(self):
        C = _int_array(self.objectives, "objectives", 2)
        p, n = C.shape
        A = np.asarray(self.constraints)
        if A.size == 0:
            A = np.zeros((0, n), dtype=np.int64)
        A = _int_array(A, "constraints", 2)
        b = _int_array(self.rhs if np.size(self.rhs) else np.zeros(0, np.int64), "rhs", 1)
        if p < 2:
            raise DimensionError("a multi-objective problem needs at least two objectives")
        if A.shape[1] != n or A.shape[0] != b.shape[0]:
            raise DimensionError(f"constraint block {A.shape} / rhs {b.shape} inconsistent with {n} variables")
        lo = _int_array(np.zeros(n, np.int64) if self.lower is None else self.lower, "lower", 1)
        up = (None,) * n if self.upper is None else tuple(None if u is None else int(u) for u in self.upper)
        if lo.shape[0] != n or len(up) != n:
            raise DimensionError("bounds must have one entry per variable")
        for j, u in enumerate(up):
            if u is not None and u < lo[j]:
                raise ValueError(f"variable {j}: upper bound {u} below lower bound {lo[j]}")
        object.__setattr__(self, "objectives", C)
        object.__setattr__(self, "constraints", A)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def num_vars(self) -> int:
        return self.objectives.shape[1]

    @property
    def num_objectives(self) -> int:
        return self.objectives.shape[0]

    @property
    def num_constraints(self) -> int:
        return self.constraints.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MOILPProblem):
            return NotImplemented
        return (
            np.array_equal(self.objectives, other.objectives)
            and np.array_equal(self.constraints, other.constraints)
            and np.array_equal(self.rhs, other.rhs)
            and np.array_equal(self.lower, other.lower)
            and self.upper == other.upper
        )

    __hash__ = None

    def implied_upper(self) -> list:
        """Upper bounds with missing entries derived from the constraints.

        Row ``i`` bounds variable ``j`` only when ``A[i, j] > 0`` and every other
        term of the row has a finite minimum; negative coefficients never
        tighten an upper bound. Entries that stay unbounded are ``None``.
        """
        A, b, lo = self.constraints, self.rhs, self.lower
        ub = list(self.upper)
        for j in range(self.num_vars):
            if ub[j] is not None:
                continue
            best = None
            for i in range(self.num_constraints):
                a = int(A[i, j])
                if a <= 0:
                    continue
                rest = 0
                for k in range(self.num_vars):
                    if k == j:
                        continue
                    c = int(A[i, k])
                    if c >= 0:
                        rest += c * int(lo[k])
                    elif self.upper[k] is not None:
                        rest += c * self.upper[k]
                    else:
                        rest = None
                        break
                if rest is None:
                    continue
                cand = (int(b[i]) - rest) // a
                best = cand if best is None else min(best, cand)
            ub[j] = best
        return ub

    def box(self):
        """Finite ``(lower, upper)`` int64 arrays or :class:`UnboundedBoxError`."""
        ub = self.implied_upper()
        missing = [j for j, u in enumerate(ub) if u is None]
        if missing:
            raise UnboundedBoxError(f"variables {missing} have no finite upper bound")
        return self.lower.copy(), np.array(ub, dtype=np.int64)

    def is_feasible(self, x) -> bool:
        x = np.asarray(x, dtype=np.int64)
        if np.any(x < self.lower):
            return False
        if any(u is not None and v > u for v, u in zip(x, self.upper)):
            return False
        return bool(np.all(self.constraints @ x <= self.rhs))


@dataclass(frozen=True)
class Solution:
    x: tuple
    outcome: Outcome = field(default=())


def evaluate(problem: MOILPProblem, x) -> Outcome:
    """Outcome ``C x``; feasibility is not checked."""
    x = np.asarray(x)
    if x.shape != (problem.num_vars,):
        raise DimensionError(f"expected {problem.num_vars} variables, got shape {x.shape}")
    xi = np.rint(x).astype(np.int64)
    return tuple(int(v) for v in problem.objectives @ xi)


class Dominance(str, Enum):
    STRICT = "strict"
    WEAK = "weak"
    NONE = "none"


def dominates(a: Sequence[int], b: Sequence[int]) -> Dominance:
    """Dominance of ``a`` over ``b`` under maximisation.

    ``STRICT`` when ``a`` is better in every component, ``WEAK`` when it is at
    least as good everywhere and different, ``NONE`` otherwise (including
    ``a == b``).
    """
    if len(a) != len(b):
        raise DimensionError(f"cannot compare vectors of length {len(a)} and {len(b)}")
    if all(x > y for x, y in zip(a, b)):
        return Dominance.STRICT
    if all(x >= y for x, y in zip(a, b)) and tuple(a) != tuple(b):
        return Dominance.WEAK
    return Dominance.NONE


def _sorted_unique_desc(points: np.ndarray) -> np.ndarray:
    U = np.unique(points, axis=0)
    return np.ascontiguousarray(U[::-1])


def pareto_filter(points: Iterable[Sequence[int]]) -> list:
    """Nondominated subset, duplicates collapsed, lexicographically descending."""
    pts = [tuple(int(v) for v in z) for z in points]
    if not pts:
        return []
    if len({len(z) for z in pts}) != 1:
        raise DimensionError("points must share one dimension")
    U = _sorted_unique_desc(np.array(pts, dtype=np.int64))
    keep = kernels.pareto_mask_sorted(U)
    return [tuple(int(v) for v in row) for row in U[keep]]


def brute_force_front(problem: MOILPProblem, max_nodes: int = 10**8) -> list:
    """Exact Pareto front by exhaustive enumeration of the integer box.

    The box comes from explicit or implied upper bounds. Partial assignments
    that cannot be completed feasibly are pruned; ``max_nodes`` caps the number
    of partial assignments visited.
    """
    lo, ub = problem.box()
    A = np.ascontiguousarray(problem.constraints)
    C = np.ascontiguousarray(problem.objectives)
    Z, nodes = kernels.enumerate_outcomes(A, problem.rhs.copy(), C, lo, ub, max_nodes)
    if nodes < 0:
        raise BudgetExceededError(f"enumeration exceeded {max_nodes} nodes")
    if Z.shape[0] == 0:
        return []
    return pareto_filter_array(Z)


def pareto_filter_array(Z: np.ndarray) -> list:
    U = _sorted_unique_desc(np.asarray(Z, dtype=np.int64))
    keep = kernels.pareto_mask_sorted(U)
    return [tuple(int(v) for v in row) for row in U[keep]]


def lex_desc(points: Iterable[Sequence[int]]) -> list:
    return sorted({tuple(int(v) for v in z) for z in points}, reverse=True)


def as_int_tuple(z) -> Optional[Outcome]:
    return None if z is None else tuple(int(v) for v in z)
