import itertools

import numpy as np
import pytest

from epsrep.instances import generate, illustrative_fixture, knapsack_spec
from epsrep.model import brute_force_front

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


TRACED_POINTS = [
    (24, 9, -14), (0, 20, 42), (14, 13, 14), (22, 6, 1), (8, 13, 29),
    (24, 5, -3), (18, 8, 9), (12, 11, 21), (6, 14, 33),
]


@pytest.fixture(scope="session")
def fixture_problem():
    return illustrative_fixture()


@pytest.fixture(scope="session")
def fixture_front(fixture_problem):
    return brute_force_front(fixture_problem)


def pairwise_front(points):
    """O(n^2) nondominated filter, independent of the package."""
    pts = {tuple(p) for p in points}
    keep = []
    for a in pts:
        if not any(b != a and all(x >= y for x, y in zip(b, a)) for b in pts):
            keep.append(a)
    return sorted(keep, reverse=True)


def enumerate_front(problem):
    """Exhaustive enumeration with itertools; only for tiny boxes."""
    lo, ub = problem.box()
    A, b, C = problem.constraints, problem.rhs, problem.objectives
    outs = []
    for x in itertools.product(*[range(int(l), int(u) + 1) for l, u in zip(lo, ub)]):
        xv = np.array(x)
        if np.all(A @ xv <= b):
            outs.append(tuple(int(v) for v in C @ xv))
    return outs


def small_knapsack(index, n=8, p=3):
    return generate(knapsack_spec(n, p=p, index=index))
