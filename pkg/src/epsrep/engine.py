"""Nested-loop generation driver with redundancy cache and early exit.

The constrained objectives (every objective except ``q``) form nested loops,
the first of them outermost. The innermost loop solves one augmented
subproblem per epsilon; every outer loop advances once its inner slice is
exhausted, using the worst value its objective reached inside that slice.
"""
import math
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CacheInconsistencyError,
    InfeasibleProblemError,
    RunTimeoutError,
)
from .model import MOILPProblem, pareto_filter
from .scalarization import DEFAULT_RHO, FrontBounds, SubproblemFactory, front_bounds
from .solver import BranchAndBound, Status
from .strategies import KINDS, make_loop_strategies

RHO_MIN = Fraction(1, 10**6)


# ------------------------------------------------------------------ cache

@dataclass(frozen=True)
class SolveRecord:
    """A solved subproblem: epsilon in loop order and its outcome (``None`` if infeasible)."""

    epsilon: tuple
    outcome: Optional[tuple]

    @property
    def feasible(self) -> bool:
        return self.outcome is not None


class Decision(str, Enum):
    MUST_SOLVE = "solve"
    REUSE = "reuse"
    INFEASIBLE = "cached-infeasible"


def check_cache(records: Sequence[SolveRecord], epsilon: Sequence, constrained: Sequence[int]):
    """Reference cache lookup, newest record first.

    Returns ``(Decision, outcome)``. A record qualifies when its epsilon is
    componentwise no larger than the query. A qualifying infeasible record
    proves the query infeasible; a qualifying feasible record whose outcome
    already meets the query bounds is optimal for the query as well.
    """
    eps = tuple(Fraction(e) for e in epsilon)
    for rec in reversed(records):
        if all(Fraction(a) <= b for a, b in zip(rec.epsilon, eps)):
            if rec.outcome is None:
                return Decision.INFEASIBLE, None
            if all(rec.outcome[k] >= e for k, e in zip(constrained, eps)):
                return Decision.REUSE, rec.outcome
    return Decision.MUST_SOLVE, None


class SolveCache:
    """Vectorised equivalent of :func:`check_cache`.

    Outcomes are integral, so ``z_k >= eps`` and ``z_k >= ceil(eps)`` describe
    the same feasible set and the augmented objectives differ by a constant.
    Keys are therefore stored as rounded-up integers.
    """

    def __init__(self, constrained: Sequence[int], capacity: int = 64):
        self.constrained = tuple(constrained)
        L = len(self.constrained)
        self._eps = np.empty((capacity, L), dtype=np.int64)
        self._z = np.empty((capacity, L), dtype=np.int64)
        self._feasible = np.empty(capacity, dtype=bool)
        self._outcomes = []
        self.size = 0

    def __len__(self):
        return self.size

    def _grow(self):
        cap = 2 * self._eps.shape[0]
        for name in ("_eps", "_z", "_feasible"):
            old = getattr(self, name)
            new = np.empty((cap,) + old.shape[1:], dtype=old.dtype)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def add(self, epsilon: Sequence, outcome: Optional[tuple]):
        if self.size == self._eps.shape[0]:
            self._grow()
        i = self.size
        self._eps[i] = [math.ceil(Fraction(e)) for e in epsilon]
        self._feasible[i] = outcome is not None
        self._z[i] = [outcome[k] for k in self.constrained] if outcome is not None else 0
        self._outcomes.append(outcome)
        self.size += 1

    def lookup(self, epsilon: Sequence):
        if self.size == 0:
            return Decision.MUST_SOLVE, None
        key = np.array([math.ceil(Fraction(e)) for e in epsilon], dtype=np.int64)
        n = self.size
        below = np.all(self._eps[:n] <= key, axis=1)
        hit = below & (~self._feasible[:n] | np.all(self._z[:n] >= key, axis=1))
        idx = np.flatnonzero(hit)
        if idx.size == 0:
            return Decision.MUST_SOLVE, None
        i = int(idx[-1])
        if not self._feasible[i]:
            return Decision.INFEASIBLE, None
        return Decision.REUSE, self._outcomes[i]

    def records(self) -> list:
        return [SolveRecord(tuple(int(v) for v in self._eps[i]), self._outcomes[i])
                for i in range(self.size)]


# ------------------------------------------------------------ early exit

def early_exit(status: Status, strategy_kind: str, k: int = None) -> str:
    """``"exit_loop"`` after an infeasible subproblem unless the strategy is gpba-a."""
    if status is not Status.INFEASIBLE:
        return "continue"
    return "continue" if strategy_kind == "gpba-a" else "exit_loop"


def full_front_params(strategy_kind: str, bounds: FrontBounds, q: int = 0) -> list:
    """Parameters under which a strategy enumerates the whole front."""
    cons = [k for k in range(len(bounds.ideal)) if k != q]
    if strategy_kind in ("gpba-a", "gpba-b"):
        return [1] * len(cons)
    if strategy_kind == "gpba-c":
        return [bounds.ranges[k] for k in cons]
    raise ValueError(f"unknown strategy {strategy_kind!r}")


# ------------------------------------------------------------------- run

@dataclass
class RunParams:
    rho: Fraction = DEFAULT_RHO
    rho_min: Fraction = RHO_MIN
    cache: bool = True
    early_exit: bool = True
    shadow: bool = False
    trace: bool = False
    timeout: Optional[float] = None
    nadir_method: str = "individual_min"

    def echo(self) -> dict:
        d = asdict(self)
        d["rho"] = str(self.rho)
        d["rho_min"] = str(self.rho_min)
        return d


@dataclass
class RunStats:
    subproblems_solved: int = 0
    cache_hits: int = 0
    cache_infeasible_hits: int = 0
    early_exits: int = 0
    iterations: int = 0
    rho_retries: int = 0
    wall_time: float = 0.0
    final_rho: str = ""

    def iter_per_solution(self, cardinality: int) -> float:
        return self.subproblems_solved / cardinality if cardinality else math.nan


@dataclass
class PassRecord:
    """One complete pass of a loop: every epsilon tried until the loop exited."""

    level: int
    objective: int
    epsilons: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)
    evaluations: int = 0
    exit_reason: str = ""
    final_max_gap: Optional[int] = None


@dataclass
class RunResult:
    representation: list
    found: list
    stats: RunStats
    params: dict
    bounds: Optional[FrontBounds] = None
    trace: list = field(default_factory=list)
    passes: list = field(default_factory=list)

    @property
    def cardinality(self) -> int:
        return len(self.representation)


@dataclass
class LoopState:
    k: int
    epsilon: Fraction
    worst: int
    payload: object = None


def _num(v: Fraction):
    return int(v) if v.denominator == 1 else float(v)


class _Runner:
    def __init__(self, problem, q, kind, params, run_params, backend, bounds):
        self.problem, self.q, self.kind = problem, q, kind
        self.rp = run_params
        self.backend = backend
        self.bounds = bounds
        self.factory = SubproblemFactory(problem, q, bounds)
        self.cons = self.factory.constrained
        self.strats = make_loop_strategies(kind, params, bounds, self.cons)
        self.cache = SolveCache(self.cons)
        self.stats = RunStats()
        self.rho = Fraction(run_params.rho)
        self.found = []
        self.found_arr = np.empty((0, problem.num_objectives), dtype=np.int64)
        self.trace = []
        self.passes = []
        self.deadline = None if run_params.timeout is None else time.perf_counter() + run_params.timeout
        L = len(self.cons)
        self.states = [LoopState(k, Fraction(bounds.nadir[k]), bounds.ideal[k],
                                 s.initial_payload()) for k, s in zip(self.cons, self.strats)]
        self.innermost = L - 1

    # -- single subproblem ------------------------------------------------

    def _solve(self, eps):
        got = self.factory.solve(eps, self.backend, self.rho)
        self.stats.subproblems_solved += 1
        while got is not None and self._dominated(got[0]) and self.rho / 2 >= self.rp.rho_min:
            self.rho /= 2
            self.stats.rho_retries += 1
            got = self.factory.solve(eps, self.backend, self.rho)
            self.stats.subproblems_solved += 1
        return None if got is None else got[0]

    def _dominated(self, z):
        if not len(self.found_arr):
            return False
        zz = np.asarray(z)
        ge = np.all(self.found_arr >= zz, axis=1) & np.any(self.found_arr > zz, axis=1)
        return bool(ge.any())

    def _evaluate(self, eps):
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise RunTimeoutError(f"run exceeded {self.rp.timeout} s")
        self.stats.iterations += 1
        decision, z = (self.cache.lookup(eps) if self.rp.cache
                       else (Decision.MUST_SOLVE, None))
        if decision is Decision.MUST_SOLVE:
            z = self._solve(eps)
            if self.rp.cache:
                self.cache.add(eps, z)
        elif decision is Decision.REUSE:
            self.stats.cache_hits += 1
            if self.rp.shadow:
                self._shadow(eps, z)
        else:
            self.stats.cache_infeasible_hits += 1
            if self.rp.shadow:
                self._shadow(eps, None)
        if z is not None:
            self.found.append(z)
            self.found_arr = np.vstack([self.found_arr, np.asarray(z, dtype=np.int64)[None, :]])
        return decision, z

    def _shadow(self, eps, expected):
        got = self.factory.solve(eps, self.backend, self.rho)
        if (got is None) != (expected is None):
            raise CacheInconsistencyError(f"cache said {expected}, solver said {got} at {eps}")
        if got is not None and got[0] != expected:
            # alternative optima are acceptable; the augmented values must agree
            cq = self.q
            w = [Fraction(wk, rk) for wk, rk in zip(self.factory.weights, self.factory.ranges)]
            def value(z):
                return z[cq] + self.rho * sum(wk * z[k] for wk, k in zip(w, self.cons))
            if abs(float(value(got[0]) - value(expected))) > 1e-7:
                raise CacheInconsistencyError(f"cached {expected} but optimum is {got[0]} at {eps}")

    # -- loops ------------------------------------------------------------

    def _prefix(self, level):
        return tuple(self.states[i].epsilon for i in range(level))

    def loop(self, level) -> bool:
        st = self.states[level]
        strat = self.strats[level]
        st.epsilon = Fraction(self.bounds.nadir[st.k])
        rec = PassRecord(level, st.k)
        any_feasible = False
        while st.epsilon <= strat.ideal:
            eps = st.epsilon
            if level == self.innermost:
                decision, z = self._evaluate(self._prefix(level) + (eps,))
                if z is not None:
                    for i in range(self.innermost):
                        s_i = self.states[i]
                        s_i.worst = min(s_i.worst, z[s_i.k])
                z_k = None if z is None else z[st.k]
            else:
                st.worst = strat.ideal
                decision = None
                feasible = self.loop(level + 1)
                z = None
                z_k = st.worst if feasible else None
            rec.epsilons.append(eps)
            rec.outcomes.append(z_k)
            rec.evaluations += 1
            any_feasible |= z_k is not None
            if z_k is None and self.rp.early_exit and strat.supports_early_exit:
                st.payload = strat.reset_payload(st.payload)
                self.stats.early_exits += 1
                rec.exit_reason = "early-exit"
                self._log(level, eps, decision, z, z_k, None, strat.digest(st.payload), "early-exit")
                break
            s_k = None if z_k is None else Fraction(z_k) - eps
            nxt, st.payload, info = strat.advance(st.payload, eps, z_k, s_k)
            if "final_max_gap" in info.detail:
                rec.final_max_gap = info.detail["final_max_gap"]
            self._log(level, eps, decision, z, z_k, nxt, strat.digest(st.payload),
                      "bound" if info.exited else None, info.detail)
            st.epsilon = nxt
        if not rec.exit_reason:
            rec.exit_reason = "gamma" if rec.final_max_gap is not None else "bound"
        self.passes.append(rec)
        return any_feasible

    def _log(self, level, eps, decision, z, z_k, nxt, digest, exit_reason, detail=None):
        if not self.rp.trace:
            return
        k = self.cons[level]
        if level == self.innermost:
            row = {"event": "evaluate", "level": level, "objective": k,
                   "epsilon": [_num(e) for e in self._prefix(level) + (eps,)],
                   "decision": decision.value, "outcome": None if z is None else list(z)}
        else:
            row = {"event": "advance", "level": level, "objective": k,
                   "epsilon": _num(eps), "worst_value": z_k}
        row["next_epsilon"] = None if nxt is None else _num(nxt)
        row["state"] = digest
        if detail:
            row["detail"] = {a: (_num(b) if isinstance(b, Fraction) else
                                 [_num(x) if isinstance(x, Fraction) else x for x in b]
                                 if isinstance(b, tuple) else b) for a, b in detail.items()}
        self.trace.append(row)
        if exit_reason:
            self.trace.append({"event": "exit", "level": level, "objective": k,
                               "epsilon": None if nxt is None else _num(nxt),
                               "reason": exit_reason})


def run(problem: MOILPProblem, q: int = 0, strategy: str = "gpba-b",
        params: Optional[Sequence] = None, run_params: Optional[RunParams] = None,
        backend=None, bounds: Optional[FrontBounds] = None) -> RunResult:
    """Generate a front or representation of ``problem``.

    ``params`` holds one gamma, delta or cardinality per constrained
    objective (loop order); ``None`` selects the full-front preset.
    """
    if strategy not in KINDS:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {KINDS}")
    rp = run_params or RunParams()
    backend = backend or BranchAndBound()
    t0 = time.perf_counter()
    if bounds is None:
        try:
            bounds = front_bounds(problem, backend, rp.nadir_method)
        except InfeasibleProblemError:
            stats = RunStats(wall_time=time.perf_counter() - t0, final_rho=str(rp.rho))
            return RunResult([], [], stats, _echo(q, strategy, params, rp))
    if params is None:
        params = full_front_params(strategy, bounds, q)
    runner = _Runner(problem, q, strategy, list(params), rp, backend, bounds)
    try:
        runner.loop(0)
    except RunTimeoutError as exc:
        exc.partial = _finish(runner, t0, q, strategy, params, rp)
        raise
    return _finish(runner, t0, q, strategy, params, rp)


def _echo(q, strategy, params, rp):
    return {"q": q, "strategy": strategy,
            "params": None if params is None else [str(Fraction(v)) for v in params],
            **rp.echo()}


def _finish(runner, t0, q, strategy, params, rp):
    stats = runner.stats
    stats.wall_time = time.perf_counter() - t0
    stats.final_rho = str(runner.rho)
    return RunResult(pareto_filter(runner.found), list(runner.found), stats,
                     _echo(q, strategy, params, rp), runner.bounds, runner.trace, runner.passes)

