import itertools

import numpy as np
import pytest

from epsrep import kernels
from epsrep.errors import NodeBudgetExceeded, NumericalInstabilityError, UnboundedBoxError
from epsrep.scalarization import build_subproblem, front_bounds
from epsrep.solver import (
    BranchAndBound,
    LinearSubproblem,
    ScipyBackend,
    Status,
    make_backend,
    simple_subproblem,
)

from conftest import small_knapsack


@pytest.fixture
def bnb():
    return BranchAndBound()


def knapsack_lp(prob, k, integer=True):
    n = prob.num_vars
    return LinearSubproblem(prob.objectives[k], prob.constraints, ("<=",) * prob.num_constraints,
                            prob.rhs, np.zeros(n), np.ones(n), np.full(n, integer))


class TestLP:
    def test_upper_bound_row(self, bnb):
        res = bnb.solve_lp(simple_subproblem([1], [[1]], ["<="], [3], integer=[False]))
        assert res.status is Status.OPTIMAL
        assert res.x[0] == pytest.approx(3.0)

    def test_contradictory_rows(self, bnb):
        sub = simple_subproblem([1], [[1], [1]], ["<=", ">="], [1, 2], integer=[False])
        assert bnb.solve_lp(sub).status is Status.INFEASIBLE

    def test_unbounded(self, bnb):
        sub = simple_subproblem([1, 0], [[1, -1]], ["<="], [1], integer=[False, False])
        assert bnb.solve_lp(sub).status is Status.UNBOUNDED

    def test_equality_and_ge_rows_match_highs(self, bnb):
        sub = simple_subproblem([3, 2, -1], [[1, 1, 1], [1, -1, 0], [0, 1, 2]],
                                ["=", ">=", "<="], [10, 1, 12], upper=[8, 8, 8],
                                integer=[False] * 3)
        ours, ref = bnb.solve_lp(sub), ScipyBackend().solve_lp(sub)
        assert ours.objective_value == pytest.approx(ref.objective_value, abs=1e-9)

    def test_degenerate_lp_terminates(self, bnb):
        # a classic cycling example for textbook Dantzig pricing
        c = [0.75, -150, 0.02, -6]
        rows = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
        sub = simple_subproblem(c, rows, ["<="] * 3, [0, 0, 1], integer=[False] * 4)
        res = bnb.solve_lp(sub)
        assert res.status is Status.OPTIMAL
        assert res.objective_value == pytest.approx(0.05, abs=1e-9)

    def test_illustrative_relaxation_bounds_ip(self, bnb, fixture_problem):
        bounds = front_bounds(fixture_problem, bnb)
        sub = build_subproblem(fixture_problem, 0, (-28, -48), bounds=bounds).linear
        lp, ip = bnb.solve_lp(sub), bnb.solve_ip(sub)
        assert lp.objective_value >= 24
        assert lp.objective_value >= ip.objective_value - 1e-9

    def test_numerical_status_raises(self, bnb, monkeypatch):
        monkeypatch.setattr(kernels, "bounded_simplex",
                            lambda *a: (kernels.LP_NUMERICAL, np.zeros(2), 0))
        with pytest.raises(NumericalInstabilityError):
            bnb.solve_lp(simple_subproblem([1], [[1]], ["<="], [3], integer=[False]))


class TestIP:
    def test_small_integer_program(self, bnb):
        res = bnb.solve_ip(simple_subproblem([2], [[2]], ["<="], [5]))
        assert res.x[0] == 2 and res.objective_value == 4

    def test_illustrative_first_point(self, bnb, fixture_problem):
        bounds = front_bounds(fixture_problem, bnb)
        sub = build_subproblem(fixture_problem, 0, (-28, -48), bounds=bounds)
        x = bnb.solve_ip(sub.linear).x[:7]
        assert tuple(int(v) for v in fixture_problem.objectives @ x.astype(int)) == (24, 9, -14)

    @pytest.mark.parametrize("index", range(3))
    def test_knapsack_max_matches_enumeration(self, bnb, index):
        prob = small_knapsack(index)
        for k in range(3):
            best = max(int(prob.objectives[k] @ np.array(x))
                       for x in itertools.product((0, 1), repeat=8)
                       if np.all(prob.constraints @ np.array(x) <= prob.rhs))
            assert bnb.solve_ip(knapsack_lp(prob, k)).objective_value == best

    def test_agrees_with_highs(self, bnb):
        rng = np.random.default_rng(21)
        highs = ScipyBackend()
        for _ in range(15):
            n, m = 6, 3
            A = rng.integers(-3, 8, size=(m, n))
            b = rng.integers(5, 25, size=m)
            c = rng.integers(-5, 10, size=n)
            sub = simple_subproblem(c, A, ["<="] * m, b, upper=np.full(n, 6.0))
            ours, ref = bnb.solve_ip(sub), highs.solve_ip(sub)
            assert ours.status is ref.status
            if ours.optimal:
                assert ours.objective_value == pytest.approx(ref.objective_value, abs=1e-7)
                assert np.all(ours.x == np.round(ours.x))

    def test_infeasible(self, bnb):
        # 2x = 1 has no integer solution although the relaxation is feasible
        sub = simple_subproblem([1], [[2]], ["="], [1], upper=[3])
        assert bnb.solve_lp(sub.with_bounds([0], [3])).status is Status.OPTIMAL
        assert bnb.solve_ip(sub).status is Status.INFEASIBLE

    def test_unbounded_integer_box(self, bnb):
        sub = simple_subproblem([1, 1], [[1, -1]], ["<="], [3])
        with pytest.raises(UnboundedBoxError):
            bnb.solve_ip(sub)

    def test_bounds_derived_from_rows(self, bnb):
        res = bnb.solve_ip(simple_subproblem([1, 1], [[2, 3]], ["<="], [12]))
        assert res.objective_value == 6

    def test_node_budget(self):
        sub = simple_subproblem([5, 4, 3], [[2, 3, 1], [4, 1, 2], [3, 4, 2]], ["<="] * 3,
                                [5.5, 11.5, 8.5])
        with pytest.raises(NodeBudgetExceeded):
            BranchAndBound(max_nodes=1).solve_ip(sub)

    def test_deterministic(self, fixture_problem):
        bounds = front_bounds(fixture_problem)
        sub = build_subproblem(fixture_problem, 0, (-10, 3), bounds=bounds).linear
        r1, r2 = BranchAndBound().solve_ip(sub), BranchAndBound().solve_ip(sub)
        assert np.array_equal(r1.x, r2.x)
        assert (r1.objective_value, r1.nodes, r1.pivots) == (r2.objective_value, r2.nodes, r2.pivots)


class TestRelaxationProperties:
    """Bounding relations between a problem and its relaxation."""

    def _random_subs(self, count=25):
        rng = np.random.default_rng(4)
        for _ in range(count):
            n, m = 5, 2
            A = rng.integers(1, 9, size=(m, n))
            b = rng.integers(3, 30, size=m)
            c = rng.integers(1, 12, size=n)
            yield simple_subproblem(c, A, ["<="] * m, b, upper=np.full(n, 3.0))

    def test_lp_bounds_ip(self, bnb):
        for sub in self._random_subs():
            lp, ip = bnb.solve_lp(sub), bnb.solve_ip(sub)
            if ip.optimal:
                assert lp.objective_value >= ip.objective_value - 1e-9

    def test_lp_infeasible_implies_ip_infeasible(self, bnb):
        sub = simple_subproblem([1, 1], [[1, 1], [-1, -1]], ["<=", "<="], [1, -2], upper=[3, 3])
        assert bnb.solve_lp(sub).status is Status.INFEASIBLE
        assert bnb.solve_ip(sub).status is Status.INFEASIBLE

    def test_integral_relaxation_is_optimal(self, bnb):
        for sub in self._random_subs():
            lp = bnb.solve_lp(sub)
            if np.allclose(lp.x, np.round(lp.x), atol=1e-6):
                assert bnb.solve_ip(sub).objective_value == pytest.approx(lp.objective_value)


def test_make_backend():
    assert isinstance(make_backend("bnb"), BranchAndBound)
    assert isinstance(make_backend("scipy"), ScipyBackend)
    with pytest.raises(ValueError):
        make_backend("cplex")


def test_subproblem_validation():
    with pytest.raises(ValueError):
        simple_subproblem([1], [[1]], ["<"], [1])
    with pytest.raises(ValueError):
        LinearSubproblem([1], [[1]], ("<=",), [1], [-np.inf], [1], [True])
