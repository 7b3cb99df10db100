"""Epsilon-adjustment rules for the three representation strategies.

* ``gpba-a`` (coverage): bisect the widest gap of a discard set until every
  gap is within ``gamma``.
* ``gpba-b`` (uniformity): step ``delta`` beyond the last outcome.
* ``gpba-c`` (cardinality): walk a grid of ``c`` points that is re-anchored at
  the last outcome whenever its slack skips grid points.

The ``*_adjust`` functions are pure. :class:`LoopStrategy` wraps one of them
with the per-loop constants the engine needs.
"""
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ZeroRangeError

KINDS = ("gpba-a", "gpba-b", "gpba-c")


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def ceil_frac(v) -> int:
    return math.ceil(_frac(v))


# ---------------------------------------------------------------- coverage

@dataclass(frozen=True)
class DiscardSet:
    """Sorted set of integers stored as disjoint, non-adjacent closed intervals."""

    intervals: tuple = ()

    @classmethod
    def of(cls, values: Sequence[int]) -> "DiscardSet":
        d = cls()
        for v in values:
            d = d.add(v, v)
        return d

    def add(self, lo: int, hi: int) -> "DiscardSet":
        if hi < lo:
            return self
        out = []
        for a, b in self.intervals:
            if b < lo - 1 or a > hi + 1:
                out.append((a, b))
            else:
                lo, hi = min(lo, a), max(hi, b)
        out.append((lo, hi))
        return DiscardSet(tuple(sorted(out)))

    def __len__(self):
        return sum(b - a + 1 for a, b in self.intervals)

    def __contains__(self, v):
        i = bisect_left(self.intervals, (v + 1,)) - 1
        return i >= 0 and self.intervals[i][0] <= v <= self.intervals[i][1]

    def __iter__(self):
        for a, b in self.intervals:
            yield from range(a, b + 1)

    def max_gap(self) -> Optional[tuple]:
        """Most distant consecutive members ``(z1, z2)``; the smallest ``z1`` wins ties."""
        best, gap = None, 0
        prev_hi = None
        for a, b in self.intervals:
            if prev_hi is not None and a - prev_hi > gap:
                best, gap = (prev_hi, a), a - prev_hi
            if b > a and gap < 1:
                best, gap = (a, a + 1), 1
            prev_hi = b
        return best


def gpba_a_adjust(gamma, epsilon, z_k: Optional[int], ideal: int, nadir: int, D: DiscardSet):
    """One coverage step. ``z_k is None`` means the subproblem was infeasible.

    Returns ``(epsilon', D')``; ``epsilon' = ideal + 1`` with an empty set
    signals the end of the loop.
    """
    epsilon = _frac(epsilon)
    top = ideal if z_k is None else z_k
    D = D.add(ceil_frac(epsilon), top)
    if epsilon == nadir:
        return Fraction(ideal), D
    pair = D.max_gap()
    if pair is None:
        raise RuntimeError("discard set holds fewer than two points away from the nadir; "
                           "the driver skipped the first extreme")
    z1, z2 = pair
    # integer outcomes: gaps of one cannot be split further
    if z2 - z1 <= max(_frac(gamma), 1):
        return Fraction(ideal + 1), DiscardSet()
    return Fraction(z1 + z2, 2), D


# -------------------------------------------------------------- uniformity

def gpba_b_adjust(delta, z_k) -> Fraction:
    return _frac(z_k) + _frac(delta)


# ------------------------------------------------------------- cardinality

@dataclass(frozen=True)
class GridState:
    z_start: Fraction
    remaining: int
    position: int
    base: int

    @classmethod
    def initial(cls, nadir, c: int) -> "GridState":
        return cls(_frac(nadir), c - 1, 0, c)

    def reset(self, nadir) -> "GridState":
        return GridState(_frac(nadir), self.base, 0, self.base)


def grid_step(z_start, remaining: int, ideal) -> Fraction:
    span = _frac(ideal) - _frac(z_start)
    if remaining <= 0:
        return max(span, Fraction(1))
    return max(span / remaining, Fraction(1))


def gpba_c_adjust(state: GridState, ideal: int, nadir: int, z_k, s_k):
    """One cardinality step.

    ``z_k``/``s_k`` of ``None`` (an infeasible subproblem when early exit is
    off) advance along the grid without re-anchoring. Returns
    ``(epsilon', state')``; when ``epsilon' > ideal`` the state has already
    been reset for the next pass.
    """
    step = grid_step(state.z_start, state.remaining, ideal)
    skip = 0 if s_k is None else math.floor(abs(_frac(s_k) / step))
    if skip > 0:
        z_start = _frac(z_k)
        remaining = state.remaining - state.position
        position = 1
        step = grid_step(z_start, remaining, ideal)
    else:
        z_start, remaining, position = state.z_start, state.remaining, state.position + 1
    epsilon = z_start + position * step
    new = GridState(z_start, remaining, position, state.base)
    if epsilon > ideal:
        new = new.reset(nadir)
    return epsilon, new


# ----------------------------------------------------------------- targets

@dataclass(frozen=True)
class QualityTargets:
    """One positive target per constrained objective, in loop order."""

    objectives: tuple
    values: tuple

    def __post_init__(self):
        vals = tuple(_frac(v) for v in self.values)
        if len(vals) != len(self.objectives):
            raise ValueError("one target per constrained objective is required")
        if any(v <= 0 for v in vals):
            raise ValueError(f"targets must be strictly positive, got {vals}")
        object.__setattr__(self, "objectives", tuple(self.objectives))
        object.__setattr__(self, "values", vals)

    def __getitem__(self, k):
        return self.values[self.objectives.index(k)]

    def rounded(self) -> "QualityTargets":
        return QualityTargets(self.objectives, tuple(max(1, math.floor(v)) for v in self.values))


def targets_from_cardinality(bounds, c: Sequence[int], q: int = 0, integral=False) -> QualityTargets:
    """``(ideal_k - nadir_k) / c_k`` for every constrained objective."""
    cons = tuple(k for k in range(len(bounds.ideal)) if k != q)
    if len(c) != len(cons):
        raise ValueError(f"expected {len(cons)} cardinalities, got {len(c)}")
    if any(int(ck) < 1 for ck in c):
        raise ValueError("cardinalities must be at least 1")
    vals = []
    for k, ck in zip(cons, c):
        r = bounds.ranges[k]
        if r == 0:
            raise ZeroRangeError(f"objective {k} has zero range")
        vals.append(Fraction(r, int(ck)))
    t = QualityTargets(cons, tuple(vals))
    return t.rounded() if integral else t


# ------------------------------------------------------- stateful wrapper

@dataclass
class StepInfo:
    epsilon: Fraction
    exited: bool
    detail: dict = field(default_factory=dict)


@dataclass
class LoopStrategy:
    """Per-loop adapter used by the engine.

    ``param`` is ``gamma`` (gpba-a), ``delta`` (gpba-b) or the cardinality
    ``c`` (gpba-c) for objective ``k``.
    """

    kind: str
    k: int
    param: object
    ideal: int
    nadir: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {KINDS}")
        if self.kind == "gpba-c":
            self.param = int(self.param)
            if self.param < 1:
                raise ValueError("cardinality must be at least 1")
        else:
            self.param = _frac(self.param)
            if self.param <= 0:
                raise ValueError("gamma/delta must be positive")

    @property
    def supports_early_exit(self) -> bool:
        return self.kind != "gpba-a"

    def initial_payload(self):
        if self.kind == "gpba-a":
            return DiscardSet()
        if self.kind == "gpba-c":
            return GridState.initial(self.nadir, self.param)
        return None

    def reset_payload(self, payload):
        if self.kind == "gpba-c":
            return payload.reset(self.nadir)
        if self.kind == "gpba-a":
            return DiscardSet()
        return None

    def advance(self, payload, epsilon, z_k, s_k):
        """Next epsilon after a solve (``z_k is None`` for infeasible)."""
        epsilon = _frac(epsilon)
        detail = {}
        if self.kind == "gpba-a":
            eps, new = gpba_a_adjust(self.param, epsilon, z_k, self.ideal, self.nadir, payload)
            if eps > self.ideal and epsilon != self.nadir:
                top = self.ideal if z_k is None else z_k
                z1, z2 = payload.add(ceil_frac(epsilon), top).max_gap()
                detail["final_max_gap"] = z2 - z1
                detail["gamma_exit"] = True
        elif self.kind == "gpba-b":
            eps = gpba_b_adjust(self.param, z_k) if z_k is not None else epsilon + self.param
            new = None
        else:
            step = grid_step(payload.z_start, payload.remaining, self.ideal)
            eps, new = gpba_c_adjust(payload, self.ideal, self.nadir, z_k, s_k)
            detail["step"] = step
            detail["grid"] = (new.z_start, new.remaining, new.position)
        return eps, new, StepInfo(eps, eps > self.ideal, detail)

    def digest(self, payload) -> str:
        if self.kind == "gpba-a":
            return "D=" + ",".join(f"{a}..{b}" if a != b else f"{a}" for a, b in payload.intervals)
        if self.kind == "gpba-c":
            return f"start={payload.z_start} c'={payload.remaining} i={payload.position}"
        return f"delta={self.param}"


def make_loop_strategies(kind: str, params: Sequence, bounds, cons: Sequence[int]) -> list:
    if len(params) != len(cons):
        raise ValueError(f"{kind} needs {len(cons)} parameters, got {len(params)}")
    return [LoopStrategy(kind, k, v, bounds.ideal[k], bounds.nadir[k]) for k, v in zip(cons, params)]
