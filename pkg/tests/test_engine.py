from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epsrep.engine import (
    Decision,
    RunParams,
    SolveCache,
    SolveRecord,
    check_cache,
    early_exit,
    full_front_params,
    run,
)
from epsrep.errors import RunTimeoutError
from epsrep.model import MOILPProblem, brute_force_front
from epsrep.scalarization import FrontBounds, front_bounds
from epsrep.solver import BranchAndBound, LinearSubproblem, Status

from conftest import enumerate_front, pairwise_front, small_knapsack

BOUNDS = FrontBounds((24, 49, 42), (-28, -28, -48))
NO_ACCEL = RunParams(cache=False, early_exit=False)


@pytest.fixture(scope="module")
def fixture_bounds(fixture_problem):
    return front_bounds(fixture_problem)


def traced(problem, kind, params, bounds, **kw):
    return run(problem, strategy=kind, params=params, bounds=bounds,
               run_params=RunParams(trace=True, **kw))


def first_slice(result):
    """Evaluate events up to the first outer advance, then that advance."""
    evals = []
    for row in result.trace:
        if row["event"] == "evaluate":
            evals.append(row)
        elif row["event"] == "advance":
            return evals, row
    raise AssertionError("no outer advance in trace")


class TestCheckCache:
    def test_empty(self):
        assert check_cache([], (0, 0), (1, 2)) == (Decision.MUST_SOLVE, None)

    def test_reuse(self):
        recs = [SolveRecord((-28, -48), (24, 9, -14))]
        assert check_cache(recs, (-28, -20), (1, 2)) == (Decision.REUSE, (24, 9, -14))

    def test_outcome_below_query(self):
        recs = [SolveRecord((-28, -48), (24, 9, -14))]
        assert check_cache(recs, (-28, -4), (1, 2))[0] is Decision.MUST_SOLVE

    def test_infeasible(self):
        recs = [SolveRecord((10, 10), None)]
        assert check_cache(recs, (12, 15), (1, 2)) == (Decision.INFEASIBLE, None)
        assert check_cache(recs, (9, 15), (1, 2))[0] is Decision.MUST_SOLVE

    def test_newest_first(self):
        recs = [SolveRecord((0, 0), (5, 5, 5)), SolveRecord((1, 1), (4, 4, 4))]
        assert check_cache(recs, (2, 2), (1, 2)) == (Decision.REUSE, (4, 4, 4))

    def test_fractional_query(self):
        recs = [SolveRecord((0, 0), (1, 3, 3))]
        assert check_cache(recs, (Fraction(5, 2), 3), (1, 2))[0] is Decision.REUSE
        assert check_cache(recs, (Fraction(7, 2), 3), (1, 2))[0] is Decision.MUST_SOLVE


records_st = st.lists(
    st.tuples(st.tuples(st.integers(0, 6), st.integers(0, 6)),
              st.one_of(st.none(), st.tuples(st.integers(0, 9), st.integers(0, 9), st.integers(0, 9)))),
    max_size=12)


@settings(max_examples=300)
@given(records_st, st.tuples(st.integers(0, 7), st.integers(0, 7)))
def test_vectorised_cache_matches_reference(recs, query):
    records = [SolveRecord(e, z) for e, z in recs]
    cache = SolveCache((1, 2), capacity=2)
    for r in records:
        cache.add(r.epsilon, r.outcome)
    assert cache.lookup(query) == check_cache(records, query, (1, 2))
    assert cache.records() == records


class TestEarlyExit:
    @pytest.mark.parametrize("kind, expected", [
        ("gpba-a", "continue"), ("gpba-b", "exit_loop"), ("gpba-c", "exit_loop")])
    def test_infeasible(self, kind, expected):
        assert early_exit(Status.INFEASIBLE, kind, 2) == expected

    def test_optimal_always_continues(self):
        assert early_exit(Status.OPTIMAL, "gpba-b") == "continue"


class TestFullFrontParams:
    def test_presets(self):
        assert full_front_params("gpba-a", BOUNDS) == [1, 1]
        assert full_front_params("gpba-b", BOUNDS) == [1, 1]
        assert full_front_params("gpba-c", BOUNDS) == [77, 90]
        assert full_front_params("gpba-c", BOUNDS, q=1) == [52, 90]

    def test_unknown(self):
        with pytest.raises(ValueError):
            full_front_params("gpba-x", BOUNDS)


class TestTraces:
    """Worked example on the illustrative problem, first outer slice."""

    def test_uniformity_slice(self, fixture_problem, fixture_bounds):
        res = traced(fixture_problem, "gpba-b", (10, 10), fixture_bounds)
        evals, adv = first_slice(res)
        assert [e["epsilon"][1] for e in evals] == [-48, -4, 7, 19, 31]
        assert [tuple(e["outcome"]) for e in evals] == [
            (24, 9, -14), (24, 5, -3), (18, 8, 9), (12, 11, 21), (6, 14, 33)]
        assert evals[-1]["next_epsilon"] == 43
        assert adv["worst_value"] == 5 and adv["next_epsilon"] == 15

    def test_coverage_slice(self, fixture_problem, fixture_bounds):
        res = traced(fixture_problem, "gpba-a", (15, 15), fixture_bounds)
        evals, adv = first_slice(res)
        assert [e["epsilon"][1] for e in evals] == [-48, 42, 14, 0, 28]
        assert [tuple(e["outcome"]) for e in evals] == [
            (24, 9, -14), (0, 20, 42), (14, 13, 14), (22, 6, 1), (8, 13, 29)]
        assert evals[-1]["detail"]["final_max_gap"] == 14
        assert adv["worst_value"] == 6 and adv["next_epsilon"] == 49

    def test_cardinality_slice(self, fixture_problem, fixture_bounds):
        res = traced(fixture_problem, "gpba-c", (5, 5), fixture_bounds)
        evals, adv = first_slice(res)
        assert [e["epsilon"][1] for e in evals] == [-48, 0, 14, 28, 42]
        assert [tuple(e["outcome"]) for e in evals] == [
            (24, 9, -14), (22, 6, 1), (14, 13, 14), (8, 13, 29), (0, 20, 42)]
        assert adv["worst_value"] == 6
        assert adv["detail"]["step"] == 19.25
        assert adv["detail"]["grid"] == [6, 4, 1]
        assert adv["next_epsilon"] == 16.75

    def test_trace_records_cache_decisions(self, fixture_problem, fixture_bounds):
        res = traced(fixture_problem, "gpba-c", (5, 5), fixture_bounds)
        decisions = {e["decision"] for e in res.trace if e["event"] == "evaluate"}
        assert decisions <= {"solve", "reuse", "cached-infeasible"}
        assert "reuse" in decisions

    def test_trace_off_by_default(self, fixture_problem, fixture_bounds):
        res = run(fixture_problem, strategy="gpba-b", params=(10, 10), bounds=fixture_bounds)
        assert res.trace == []


class TestFullFront:
    @pytest.mark.parametrize("kind", ["gpba-a", "gpba-b", "gpba-c"])
    @pytest.mark.parametrize("index", range(3))
    def test_knapsack(self, kind, index):
        prob = small_knapsack(index)
        res = run(prob, strategy=kind)
        assert res.representation == pairwise_front(enumerate_front(prob))

    def test_fixture_uniformity_preset(self, fixture_problem, fixture_bounds, fixture_front):
        res = run(fixture_problem, strategy="gpba-b", bounds=fixture_bounds)
        assert res.representation == fixture_front
        assert res.stats.subproblems_solved <= 2 * len(fixture_front)

    def test_infeasible_problem(self):
        prob = MOILPProblem([[1, 0], [0, 1]], [[-1, -1]], [-5], upper=[1, 1])
        res = run(prob)
        assert res.representation == [] and res.stats.subproblems_solved == 0

    def test_two_objectives(self):
        prob = MOILPProblem([[1], [-1]], [[1]], [4])
        assert run(prob).representation == brute_force_front(prob)

    def test_other_kept_objective(self, fixture_problem, fixture_front):
        prob = small_knapsack(2)
        assert run(prob, q=2, strategy="gpba-c").representation == brute_force_front(prob)

    def test_unknown_strategy(self, fixture_problem):
        with pytest.raises(ValueError):
            run(fixture_problem, strategy="gpba-z")


class TestAccelerations:
    @pytest.mark.parametrize("kind, params", [
        ("gpba-a", (15, 15)), ("gpba-b", (10, 10)), ("gpba-c", (5, 5)), ("gpba-c", None)])
    def test_sound_on_fixture(self, fixture_problem, fixture_bounds, kind, params):
        fast = run(fixture_problem, strategy=kind, params=params, bounds=fixture_bounds)
        slow = run(fixture_problem, strategy=kind, params=params, bounds=fixture_bounds,
                   run_params=NO_ACCEL)
        assert fast.representation == slow.representation
        assert fast.stats.subproblems_solved <= slow.stats.subproblems_solved

    @pytest.mark.parametrize("index", range(4))
    def test_sound_on_knapsacks(self, index):
        prob = small_knapsack(index, n=10)
        for kind in ("gpba-a", "gpba-b", "gpba-c"):
            params = (40, 40) if kind != "gpba-c" else (4, 4)
            fast = run(prob, strategy=kind, params=params)
            slow = run(prob, strategy=kind, params=params, run_params=NO_ACCEL)
            assert fast.representation == slow.representation

    def test_early_exit_resets_grid(self, fixture_problem, fixture_bounds):
        res = traced(fixture_problem, "gpba-c", (5, 5), fixture_bounds)
        exits = [r for r in res.trace if r["event"] == "exit" and r["reason"] == "early-exit"]
        assert exits and res.stats.early_exits == len(exits)
        for row in res.trace:
            if row["event"] == "evaluate" and row["outcome"] is None and row["objective"] == 2:
                assert row["state"] == "start=-48 c'=5 i=0"

    @pytest.mark.parametrize("kind", ["gpba-a", "gpba-b", "gpba-c"])
    def test_shadow_mode_confirms_cache(self, fixture_problem, fixture_bounds, kind):
        res = run(fixture_problem, strategy=kind, params=None if kind == "gpba-a" else (6, 6),
                  bounds=fixture_bounds, run_params=RunParams(shadow=True))
        assert res.stats.cache_hits + res.stats.cache_infeasible_hits > 0


class TestInvariants:
    def test_worst_value_is_slice_minimum(self, fixture_problem, fixture_bounds):
        res = traced(fixture_problem, "gpba-b", (10, 10), fixture_bounds)
        seen = []
        for row in res.trace:
            if row["event"] == "evaluate" and row["outcome"] is not None:
                seen.append(row["outcome"][1])
            elif row["event"] == "advance":
                if seen:
                    assert row["worst_value"] == min(seen)
                    # running minimum only ever decreases
                    assert all(a >= b for a, b in zip(
                        [min(seen[:i + 1]) for i in range(len(seen))],
                        [min(seen[:i + 2]) for i in range(len(seen) - 1)]))
                seen = []

    def test_uniformity_spacing_within_pass(self, fixture_problem, fixture_bounds):
        res = run(fixture_problem, strategy="gpba-b", params=(10, 10), bounds=fixture_bounds)
        for rec in res.passes:
            if rec.level == 1:
                z = [v for v in rec.outcomes if v is not None]
                assert all(b - a >= 10 for a, b in zip(z, z[1:]))

    def test_cardinality_budget_per_pass(self, fixture_problem, fixture_bounds):
        res = run(fixture_problem, strategy="gpba-c", params=(5, 5), bounds=fixture_bounds)
        assert all(rec.evaluations <= 6 for rec in res.passes)

    def test_coverage_exit_gap(self, fixture_problem, fixture_bounds):
        res = run(fixture_problem, strategy="gpba-a", params=(15, 15), bounds=fixture_bounds)
        gaps = [rec.final_max_gap for rec in res.passes if rec.final_max_gap is not None]
        assert gaps and all(g <= 15 for g in gaps)

    def test_epsilons_strictly_increase(self, fixture_problem, fixture_bounds):
        for kind, params in (("gpba-b", (10, 10)), ("gpba-c", (5, 5))):
            res = run(fixture_problem, strategy=kind, params=params, bounds=fixture_bounds)
            for rec in res.passes:
                assert all(b > a for a, b in zip(rec.epsilons, rec.epsilons[1:]))

    def test_stats_bookkeeping(self, fixture_problem, fixture_bounds):
        res = run(fixture_problem, strategy="gpba-c", params=(5, 5), bounds=fixture_bounds)
        s = res.stats
        assert s.iterations == s.subproblems_solved + s.cache_hits + s.cache_infeasible_hits
        assert s.iter_per_solution(res.cardinality) == s.subproblems_solved / res.cardinality
        assert res.params["params"] == ["5", "5"] and res.params["strategy"] == "gpba-c"


class Flaky:
    """Honest solver, except that large slack rewards are flipped in sign."""

    def __init__(self, n, threshold=1e-4):
        self.inner, self.n, self.threshold = BranchAndBound(), n, threshold

    def solve_ip(self, sub):
        rewards = sub.objective[self.n:]
        if rewards.size and rewards.max() > self.threshold:
            obj = sub.objective.copy()
            obj[self.n:] *= -1
            sub = LinearSubproblem(obj, sub.rows, sub.senses, sub.rhs, sub.lower,
                                   sub.upper, sub.integer)
        return self.inner.solve_ip(sub)


def test_rho_retry_recovers_front(fixture_problem, fixture_bounds, fixture_front):
    res = run(fixture_problem, strategy="gpba-b", bounds=fixture_bounds,
              backend=Flaky(7), run_params=RunParams(cache=False))
    assert res.stats.rho_retries >= 1
    assert Fraction(res.stats.final_rho) < Fraction(1, 1000)
    assert res.representation == fixture_front


def test_timeout_returns_partial(fixture_problem, fixture_bounds):
    with pytest.raises(RunTimeoutError) as info:
        run(fixture_problem, strategy="gpba-b", bounds=fixture_bounds,
            run_params=RunParams(timeout=0.05))
    partial = info.value.partial
    assert set(partial.representation) <= set(brute_force_front(fixture_problem))
    assert partial.stats.iterations > 0
