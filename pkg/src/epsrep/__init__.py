"""Pareto fronts and quality-controlled representations of multi-objective integer programs."""

__version__ = "0.1.0"

from .engine import RunParams, RunResult, check_cache, full_front_params, run  # noqa: E402
from .errors import EpsrepError  # noqa: E402
from .instances import GeneratorSpec, generate, illustrative_fixture, load_instance, save_instance  # noqa: E402
from .metrics import DistanceSpec, coverage_error, distance, quality_report, uniformity_level  # noqa: E402
from .model import MOILPProblem, Dominance, brute_force_front, dominates, evaluate, pareto_filter  # noqa: E402
from .scalarization import FrontBounds, build_subproblem, front_bounds, ideal_point, nadir_approx, naive_sweep  # noqa: E402
from .solver import BranchAndBound, ScipyBackend  # noqa: E402
from .strategies import targets_from_cardinality  # noqa: E402

__all__ = [
    "BranchAndBound", "DistanceSpec", "Dominance", "EpsrepError", "FrontBounds", "GeneratorSpec",
    "MOILPProblem", "RunParams", "RunResult", "ScipyBackend", "brute_force_front",
    "build_subproblem", "check_cache", "coverage_error", "distance", "dominates", "evaluate",
    "front_bounds", "full_front_params", "generate", "ideal_point", "illustrative_fixture",
    "load_instance", "nadir_approx", "naive_sweep", "pareto_filter", "quality_report", "run",
    "save_instance", "targets_from_cardinality", "uniformity_level",
]
