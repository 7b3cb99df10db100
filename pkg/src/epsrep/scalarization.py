"""Augmented epsilon-constraint subproblems, front bounds and a baseline sweep.

For a kept objective ``q`` and a bound ``eps_k`` on every other objective the
subproblem is::

    max  z_q(x) + rho * sum_k w_k * s_k / r_k
    s.t. A x <= b
         z_k(x) - s_k = eps_k,  s_k >= 0      for every constrained k

``r_k`` is the objective range ``ideal_k - nadir_k``. The weights ``w_k`` are
powers of ten that decrease from the outermost to the innermost loop, so the
outermost objective has the strongest tie-breaking pull.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    InconsistentSolutionError,
    InfeasibleProblemError,
    UnboundedObjectiveError,
    ZeroRangeError,
)
from .model import MOILPProblem, evaluate, pareto_filter
from .solver import BranchAndBound, LinearSubproblem, Status

DEFAULT_RHO = Fraction(1, 1000)
SLACK_TOL = 1e-6


@dataclass(frozen=True)
class FrontBounds:
    ideal: tuple
    nadir: tuple

    def __post_init__(self):
        ideal = tuple(int(v) for v in self.ideal)
        nadir = tuple(int(v) for v in self.nadir)
        if len(ideal) != len(nadir):
            raise ValueError("ideal and nadir must have the same length")
        if any(i < n for i, n in zip(ideal, nadir)):
            raise ValueError(f"ideal {ideal} below nadir {nadir} in some component")
        object.__setattr__(self, "ideal", ideal)
        object.__setattr__(self, "nadir", nadir)

    @property
    def ranges(self) -> tuple:
        return tuple(i - n for i, n in zip(self.ideal, self.nadir))

    def flat_objectives(self) -> list:
        return [k for k, r in enumerate(self.ranges) if r == 0]


def base_subproblem(problem: MOILPProblem, objective) -> LinearSubproblem:
    """``max objective @ x`` over the feasible set of ``problem``."""
    n = problem.num_vars
    upper = np.array([np.inf if u is None else u for u in problem.implied_upper()], float)
    return LinearSubproblem(
        np.asarray(objective, float), problem.constraints.astype(float),
        ("<=",) * problem.num_constraints, problem.rhs.astype(float),
        problem.lower.astype(float), upper, np.ones(n, bool),
    )


def _optimise(problem, backend, objective, extra=()):
    sub = base_subproblem(problem, objective)
    if extra:
        rows = np.vstack([sub.rows] + [np.asarray(r, float)[None, :] for r, _ in extra])
        rhs = np.concatenate([sub.rhs, [v for _, v in extra]])
        sub = LinearSubproblem(sub.objective, rows, sub.senses + (">=",) * len(extra), rhs,
                               sub.lower, sub.upper, sub.integer)
    res = backend.solve_ip(sub)
    if res.status is Status.UNBOUNDED:
        raise UnboundedObjectiveError("an objective is unbounded over the feasible set")
    if res.status is Status.INFEASIBLE:
        raise InfeasibleProblemError("the problem has no feasible integer solution")
    return evaluate(problem, res.x)


def ideal_point(problem: MOILPProblem, backend=None) -> tuple:
    """Componentwise maximum of every objective over the feasible set."""
    backend = backend or BranchAndBound()
    C = problem.objectives
    return tuple(_optimise(problem, backend, C[k])[k] for k in range(problem.num_objectives))


def nadir_approx(problem: MOILPProblem, backend=None, method: str = "individual_min") -> tuple:
    """Lower estimate of the nadir point.

    ``individual_min`` minimises each objective on its own. ``lex_payoff``
    builds the lexicographic payoff table (row ``k`` optimises objective ``k``
    first, then the remaining objectives in index order) and takes column
    minima.
    """
    backend = backend or BranchAndBound()
    C = problem.objectives
    p = problem.num_objectives
    if method == "individual_min":
        return tuple(_optimise(problem, backend, -C[k])[k] for k in range(p))
    if method == "lex_payoff":
        table = []
        for k in range(p):
            order = [k] + [j for j in range(p) if j != k]
            fixed = []
            z = None
            for j in order:
                z = _optimise(problem, backend, C[j], fixed)
                fixed.append((C[j], z[j]))
            table.append(z)
        return tuple(int(v) for v in np.min(np.array(table), axis=0))
    raise ValueError(f"unknown nadir method {method!r}")


def front_bounds(problem: MOILPProblem, backend=None, nadir_method="individual_min") -> FrontBounds:
    backend = backend or BranchAndBound()
    return FrontBounds(ideal_point(problem, backend), nadir_approx(problem, backend, nadir_method))


def loop_order(p: int, q: int) -> tuple:
    """Constrained objectives, outermost loop first."""
    if not 0 <= q < p:
        raise ValueError(f"q must lie in 0..{p - 1}")
    return tuple(k for k in range(p) if k != q)


def slack_weights(levels: int) -> tuple:
    return tuple(10 ** (levels - 1 - pos) for pos in range(levels))


@dataclass(frozen=True, eq=False)
class AugmentedSubproblem:
    problem: MOILPProblem
    q: int
    constrained: tuple
    epsilon: tuple
    rho: Fraction
    ranges: tuple
    weights: tuple
    linear: LinearSubproblem


class SubproblemFactory:
    """Builds augmented subproblems for one ``(problem, q, bounds)`` triple.

    The constraint block is assembled once; each call only fills in the
    epsilon right-hand sides and the slack rewards.
    """

    def __init__(self, problem: MOILPProblem, q: int, bounds: FrontBounds):
        p, n = problem.num_objectives, problem.num_vars
        self.problem, self.q, self.bounds = problem, q, bounds
        self.constrained = cons = loop_order(p, q)
        self.ranges = tuple(bounds.ranges[k] for k in cons)
        for k, r in zip(cons, self.ranges):
            if r == 0:
                raise ZeroRangeError(f"objective {k} has ideal == nadir; drop it before scalarising")
        L = len(cons)
        self.weights = slack_weights(L)
        C = problem.objectives.astype(float)
        m = problem.num_constraints
        rows = np.zeros((m + L, n + L))
        rows[:m, :n] = problem.constraints
        for pos, k in enumerate(cons):
            rows[m + pos, :n] = C[k]
            rows[m + pos, n + pos] = -1.0
        ub = [np.inf if u is None else u for u in problem.implied_upper()]
        self._rows = rows
        self._senses = ("<=",) * m + ("=",) * L
        self._rhs = problem.rhs.astype(float)
        self._lower = np.concatenate([problem.lower.astype(float), np.zeros(L)])
        self._upper = np.concatenate([np.array(ub, float), np.full(L, np.inf)])
        self._integer = np.concatenate([np.ones(n, bool), np.zeros(L, bool)])
        self._cq = C[q]

    def make(self, epsilon: Sequence, rho=DEFAULT_RHO) -> "AugmentedSubproblem":
        eps = tuple(Fraction(e) for e in epsilon)
        if len(eps) != len(self.constrained):
            raise ValueError(f"expected {len(self.constrained)} epsilon values, got {len(eps)}")
        rho = Fraction(rho)
        if rho <= 0:
            raise ValueError("rho must be positive")
        reward = [float(rho * w / r) for w, r in zip(self.weights, self.ranges)]
        obj = np.concatenate([self._cq, reward])
        rhs = np.concatenate([self._rhs, [float(e) for e in eps]])
        lin = LinearSubproblem(obj, self._rows, self._senses, rhs,
                               self._lower, self._upper, self._integer)
        return AugmentedSubproblem(self.problem, self.q, self.constrained, eps, rho,
                                   self.ranges, self.weights, lin)

    def solve(self, epsilon, backend, rho=DEFAULT_RHO):
        """``None`` when infeasible, else ``(outcome, slacks)``."""
        sub = self.make(epsilon, rho)
        res = backend.solve_ip(sub.linear)
        if res.status is Status.INFEASIBLE:
            return None
        if res.status is Status.UNBOUNDED:
            raise UnboundedObjectiveError(f"objective {self.q} is unbounded")
        return extract_outcome(sub, res)


def build_subproblem(problem: MOILPProblem, q: int, epsilon: Sequence, rho=DEFAULT_RHO,
                     bounds: Optional[FrontBounds] = None) -> AugmentedSubproblem:
    """Assemble the augmented subproblem for objective ``q``.

    ``epsilon`` lists one bound per constrained objective in loop order
    (ascending objective index without ``q``). Entries may be fractions.
    """
    if bounds is None:
        raise ValueError("front bounds are required to normalise slacks")
    return SubproblemFactory(problem, q, bounds).make(epsilon, rho)


def extract_outcome(sub: AugmentedSubproblem, result) -> tuple:
    """``(outcome, slacks)`` with the outcome recomputed from ``x``.

    Slacks are exact fractions ``z_k - eps_k`` in loop order.
    """
    if result.status is not Status.OPTIMAL:
        raise ValueError(f"cannot extract an outcome from a {result.status.value} solve")
    n = sub.problem.num_vars
    z = evaluate(sub.problem, result.x[:n])
    slacks = tuple(Fraction(z[k]) - e for k, e in zip(sub.constrained, sub.epsilon))
    for k, s in zip(sub.constrained, slacks):
        if s < -SLACK_TOL:
            raise InconsistentSolutionError(f"objective {k} violates its bound by {-float(s)}")
    return z, slacks


def solve_point(problem, q, epsilon, bounds, backend, rho=DEFAULT_RHO):
    """Solve one subproblem; ``None`` when infeasible, else ``(outcome, slacks)``."""
    return SubproblemFactory(problem, q, bounds).solve(epsilon, backend, rho)


def naive_sweep(problem: MOILPProblem, q: int = 0, eta: int = 1, backend=None,
                bounds: Optional[FrontBounds] = None, rho=DEFAULT_RHO) -> list:
    """Baseline epsilon-constraint sweep, filtered.

    Every outer constrained objective steps through each integer bound from
    the nadir estimate up to the ideal; the innermost objective advances with
    ``eps <- z + eta``. Slow but simple, which is why it serves as an oracle.
    """
    backend = backend or BranchAndBound()
    try:
        bounds = bounds or front_bounds(problem, backend)
    except InfeasibleProblemError:
        return []
    factory = SubproblemFactory(problem, q, bounds)
    cons = factory.constrained
    found = []

    def sweep(level, prefix):
        k = cons[level]
        eps = bounds.nadir[k]
        if level == len(cons) - 1:
            any_hit = False
            while eps <= bounds.ideal[k]:
                got = factory.solve(prefix + (eps,), backend, rho)
                if got is None:
                    break
                any_hit = True
                found.append(got[0])
                eps = got[0][k] + eta
            return any_hit
        any_hit = False
        while eps <= bounds.ideal[k]:
            if not sweep(level + 1, prefix + (eps,)):
                break
            any_hit = True
            eps += eta
        return any_hit

    sweep(0, ())
    return pareto_filter(found)
