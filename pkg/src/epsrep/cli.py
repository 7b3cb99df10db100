"""Command-line interface: ``epsrep gen | solve | represent | metrics | bench``."""
import argparse
import json
import math
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .engine import RunParams, full_front_params, run
from .errors import EpsrepError, RunTimeoutError
from .instances import (
    GeneratorSpec,
    generate,
    illustrative_fixture,
    load_instance,
    read_points,
    save_instance,
    write_points,
    write_table,
)
from .metrics import DistanceSpec, quality_report
from .model import brute_force_front
from .scalarization import front_bounds, naive_sweep
from .solver import make_backend
from .strategies import targets_from_cardinality

STRATEGIES = ("gpba-a", "gpba-b", "gpba-c", "naive")


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _norm(text):
    if text.lower() in ("inf", "chebyshev"):
        return math.inf
    v = float(text)
    if v < 1:
        raise argparse.ArgumentTypeError("norm order must be >= 1 or 'inf'")
    return v


def _add_run_flags(sp):
    sp.add_argument("instance", help="instance file, or 'fixture' for the worked example")
    sp.add_argument("--q", type=int, default=1, help="objective kept in the objective function (1-based)")
    sp.add_argument("--rho", type=_fraction, default=Fraction(1, 1000))
    sp.add_argument("--no-cache", action="store_true", help="disable the redundancy cache")
    sp.add_argument("--no-early-exit", action="store_true", help="disable early loop exit")
    sp.add_argument("--backend", choices=("bnb", "scipy"), default="bnb")
    sp.add_argument("--nadir", choices=("individual_min", "lex_payoff"), default="individual_min")
    sp.add_argument("--timeout", type=float, default=None, help="seconds per run")
    sp.add_argument("--trace", type=Path, help="write a JSON-lines run log here")
    sp.add_argument("--oracle", action="store_true", help="compare against brute-force enumeration")
    sp.add_argument("--out", type=Path, help="CSV output (a .json mirror is written alongside)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="epsrep", description=__doc__)
    ap.add_argument("--version", action="version", version=f"epsrep {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate seeded knapsack-type instances")
    g.add_argument("--p", type=int, default=3)
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--kind", choices=("binary", "integer"), default="binary")
    g.add_argument("--range", nargs=2, type=int, default=(1, 100), metavar=("LO", "HI"))
    g.add_argument("--objective-seeds", nargs="+", type=int, default=[128, 888, 6, 52])
    g.add_argument("--constraint-seeds", nargs="+", type=int, default=[40, 91, 17, 63, 75])
    g.add_argument("--increment", type=int, default=5)
    g.add_argument("--count", type=int, default=30)
    g.add_argument("--start", type=int, default=0, help="first instance index")
    g.add_argument("--fixture", action="store_true", help="write the worked-example instance instead")
    g.add_argument("--out-dir", type=Path, default=Path("instances"))

    s = sub.add_parser("solve", help="compute the full Pareto front")
    _add_run_flags(s)
    s.add_argument("--strategy", choices=STRATEGIES, default="gpba-b")

    r = sub.add_parser("represent", help="compute a representation with quality targets")
    _add_run_flags(r)
    r.add_argument("--strategy", choices=STRATEGIES[:3], required=True)
    r.add_argument("--gamma", nargs="+", type=_fraction)
    r.add_argument("--delta", nargs="+", type=_fraction)
    r.add_argument("--c", nargs="+", type=int, dest="cardinality")
    r.add_argument("--target-cardinality", nargs="+", type=int,
                   help="derive gamma/delta as range / c per constrained objective")
    r.add_argument("--reference", type=Path, help="front CSV/JSON to measure coverage against")
    r.add_argument("--norm", type=_norm, default=math.inf)

    m = sub.add_parser("metrics", help="quality of a representation against a front")
    m.add_argument("representation", type=Path)
    m.add_argument("front", type=Path, nargs="?")
    m.add_argument("--norm", type=_norm, default=math.inf)
    m.add_argument("--out", type=Path)

    b = sub.add_parser("bench", help="run a battery of generated instances")
    b.add_argument("--count", type=int, default=30)
    b.add_argument("--p", type=int, default=3)
    b.add_argument("--n", type=int, default=10)
    b.add_argument("--m", type=int, default=1)
    b.add_argument("--kind", choices=("binary", "integer"), default="binary")
    b.add_argument("--range", nargs=2, type=int, default=(1, 100), metavar=("LO", "HI"))
    b.add_argument("--strategies", nargs="+", choices=STRATEGIES, default=list(STRATEGIES))
    b.add_argument("--target-cardinality", type=int,
                   help="representation mode: c per objective (default: full front)")
    b.add_argument("--oracle", action="store_true")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--timeout", type=float, default=None)
    b.add_argument("--no-cache", action="store_true")
    b.add_argument("--no-early-exit", action="store_true")
    b.add_argument("--out", type=Path, default=Path("bench.csv"))
    return ap


# ------------------------------------------------------------------ helpers

def _load(path_text):
    if path_text == "fixture":
        return illustrative_fixture()
    return load_instance(path_text).problem


def _run_params(args) -> RunParams:
    return RunParams(rho=args.rho, cache=not args.no_cache, early_exit=not args.no_early_exit,
                     trace=args.trace is not None, timeout=args.timeout, nadir_method=args.nadir)


def _write_trace(path, result):
    with Path(path).open("w") as fh:
        for row in result.trace:
            fh.write(json.dumps(row) + "\n")
        for p in result.passes:
            fh.write(json.dumps({"event": "pass", "level": p.level, "objective": p.objective + 1,
                                 "evaluations": p.evaluations, "exit_reason": p.exit_reason,
                                 "final_max_gap": p.final_max_gap}) + "\n")


def _emit(obj):
    print(json.dumps(obj, indent=1, default=str))


def _stats_dict(result):
    st = result.stats
    return {"cardinality": result.cardinality,
            "subproblems_solved": st.subproblems_solved,
            "cache_hits": st.cache_hits,
            "cache_infeasible_hits": st.cache_infeasible_hits,
            "early_exits": st.early_exits,
            "iterations": st.iterations,
            "iter_per_solution": st.iter_per_solution(result.cardinality),
            "rho_retries": st.rho_retries,
            "wall_time": round(st.wall_time, 6)}


# ----------------------------------------------------------------- commands

def cmd_gen(args):
    args.out_dir.mkdir(parents=True, exist_ok=True)
    if args.fixture:
        path = save_instance(illustrative_fixture(), args.out_dir / "illustrative.txt")
        _emit({"written": [str(path)]})
        return 0
    base = GeneratorSpec(args.p, args.n, args.m, args.kind, tuple(args.range),
                         tuple(args.objective_seeds[:args.p]),
                         tuple(args.constraint_seeds[:args.m]), args.increment, 0)
    written = []
    for idx in range(args.start, args.start + args.count):
        spec = base.with_index(idx)
        prob = generate(spec)
        written.append(str(save_instance(prob, args.out_dir / f"{prob.name}.txt", spec)))
    _emit({"written": written})
    return 0


def _solve_one(problem, args, strategy, params):
    backend = make_backend(args.backend)
    q = args.q - 1
    if strategy == "naive":
        t0 = time.perf_counter()
        pts = naive_sweep(problem, q, backend=backend, rho=args.rho)
        return pts, {"cardinality": len(pts), "wall_time": time.perf_counter() - t0}, None
    result = run(problem, q, strategy, params, _run_params(args), backend)
    if args.trace:
        _write_trace(args.trace, result)
    return result.representation, _stats_dict(result), result


def cmd_solve(args):
    problem = _load(args.instance)
    pts, stats, _ = _solve_one(problem, args, args.strategy, None)
    report = {"command": "solve", "strategy": args.strategy, **stats}
    if args.oracle:
        ref = brute_force_front(problem)
        report["oracle_size"] = len(ref)
        report["oracle_equal"] = set(pts) == set(ref)
    if args.out:
        write_points(args.out, pts, args.strategy)
        report["out"] = str(args.out)
    _emit(report)
    return 0 if report.get("oracle_equal", True) else 3


def cmd_represent(args):
    problem = _load(args.instance)
    given = [v for v in (args.gamma, args.delta, args.cardinality) if v]
    if len(given) > 1:
        raise SystemExit("epsrep represent: give only one of --gamma, --delta, --c")
    expected = {"gpba-a": args.gamma, "gpba-b": args.delta, "gpba-c": args.cardinality}[args.strategy]
    if given and expected is None:
        raise SystemExit(f"epsrep represent: the parameter given does not match {args.strategy}")
    params = expected
    if params is None:
        if not args.target_cardinality:
            raise SystemExit("epsrep represent: supply the strategy parameter or --target-cardinality")
        if args.strategy == "gpba-c":
            params = list(args.target_cardinality)
        else:
            fb = front_bounds(problem, make_backend(args.backend), args.nadir)
            params = list(targets_from_cardinality(fb, args.target_cardinality, args.q - 1).values)
    pts, stats, _ = _solve_one(problem, args, args.strategy, params)
    ref = None
    if args.reference:
        ref = read_points(args.reference)
    elif args.oracle:
        ref = brute_force_front(problem)
    report = {"command": "represent", "strategy": args.strategy,
              "params": [str(v) for v in params], **stats}
    if pts:
        report["quality"] = quality_report(pts, ref, DistanceSpec(args.norm)).as_row()
    if args.out:
        write_points(args.out, pts, args.strategy)
        report["out"] = str(args.out)
    _emit(report)
    return 0


def cmd_metrics(args):
    R = read_points(args.representation)
    N = read_points(args.front) if args.front else None
    row = quality_report(R, N, DistanceSpec(args.norm)).as_row()
    if args.out:
        write_table(args.out, [row])
    _emit(row)
    return 0


def _bench_instance(job):
    idx, cfg = job
    spec = GeneratorSpec(cfg["p"], cfg["n"], cfg["m"], cfg["kind"], tuple(cfg["range"]),
                         tuple([128, 888, 6, 52][:cfg["p"]]), tuple([40, 91, 17, 63, 75][:cfg["m"]]),
                         5, idx)
    problem = generate(spec)
    rows = []
    ref = None
    try:
        ref = brute_force_front(problem) if cfg["oracle"] or cfg["target"] else None
    except EpsrepError as exc:
        rows.append({"instance": idx, "strategy": "oracle", "status": f"error: {exc}"})
    backend = make_backend("bnb")
    rp = RunParams(cache=cfg["cache"], early_exit=cfg["early_exit"], timeout=cfg["timeout"])
    bounds = None
    for strategy in cfg["strategies"]:
        row = {"instance": idx, "strategy": strategy, "status": "ok"}
        t0 = time.perf_counter()
        try:
            if strategy == "naive":
                pts = naive_sweep(problem, 0, backend=backend)
                row["subproblems_solved"] = ""
            else:
                bounds = bounds or front_bounds(problem, backend)
                params = None
                if cfg["target"]:
                    c = [cfg["target"]] * (cfg["p"] - 1)
                    params = (c if strategy == "gpba-c" else
                              list(targets_from_cardinality(bounds, c).values))
                res = run(problem, 0, strategy, params, rp, backend, bounds)
                pts = res.representation
                row["subproblems_solved"] = res.stats.subproblems_solved
                row["iter_per_solution"] = res.stats.iter_per_solution(len(pts))
        except RunTimeoutError:
            row["status"] = "timeout"
            rows.append(row)
            continue
        except EpsrepError as exc:
            row["status"] = f"error: {exc}"
            rows.append(row)
            continue
        row["wall_time"] = round(time.perf_counter() - t0, 6)
        row["cardinality"] = len(pts)
        if pts:
            q = quality_report(pts, ref)
            row["coverage_error"] = q.coverage_error
            row["uniformity_level"] = q.uniformity_level
        if ref is not None and not cfg["target"]:
            row["oracle_equal"] = set(pts) == set(ref)
        rows.append(row)
    return idx, rows


def aggregate(rows, columns=("cardinality", "coverage_error", "uniformity_level",
                              "subproblems_solved", "iter_per_solution", "wall_time")):
    """Mean and sample standard deviation per strategy over successful rows."""
    out = []
    strategies = []
    for r in rows:
        if r["strategy"] not in strategies:
            strategies.append(r["strategy"])
    for s in strategies:
        ok = [r for r in rows if r["strategy"] == s and r.get("status") == "ok"]
        agg = {"instance": "mean", "strategy": s, "status": f"{len(ok)} ok"}
        dev = {"instance": "std", "strategy": s, "status": ""}
        for c in columns:
            vals = [float(r[c]) for r in ok if r.get(c) not in (None, "")]
            agg[c] = statistics.fmean(vals) if vals else ""
            dev[c] = statistics.stdev(vals) if len(vals) > 1 else ""
        if any("oracle_equal" in r for r in ok):
            agg["oracle_equal"] = all(r.get("oracle_equal", False) for r in ok)
        out += [agg, dev]
    return out


def cmd_bench(args):
    cfg = {"p": args.p, "n": args.n, "m": args.m, "kind": args.kind, "range": list(args.range),
           "strategies": args.strategies, "oracle": args.oracle, "target": args.target_cardinality,
           "cache": not args.no_cache, "early_exit": not args.no_early_exit,
           "timeout": args.timeout}
    jobs = [(i, cfg) for i in range(args.count)]
    results = {}
    partial = args.out.with_suffix(".partial.csv")
    try:
        if args.workers > 1:
            with ProcessPoolExecutor(args.workers) as pool:
                for idx, rows in pool.map(_bench_instance, jobs):
                    results[idx] = rows
        else:
            for job in jobs:
                idx, rows = _bench_instance(job)
                results[idx] = rows
                write_table(partial, [r for i in sorted(results) for r in results[i]], json_mirror=False)
    except KeyboardInterrupt:
        pass
    rows = [r for i in sorted(results) for r in results[i]]
    missing = [i for i in range(args.count) if i not in results]
    rows += [{"instance": i, "strategy": "", "status": "not-run"} for i in missing]
    agg = aggregate(rows)
    write_table(args.out, rows + agg)
    if partial.exists():
        partial.unlink()
    _emit({"command": "bench", "out": str(args.out), "instances": len(results),
           "aggregate": agg})
    bad = [r for r in rows if r.get("status") != "ok" or r.get("oracle_equal") is False]
    return 0 if not bad else 3


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "represent": cmd_represent,
            "metrics": cmd_metrics, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (EpsrepError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
