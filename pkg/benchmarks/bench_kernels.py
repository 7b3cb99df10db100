"""Compare the numba-compiled kernels with their numpy fallbacks.

Run: python benchmarks/bench_kernels.py --repeats 5

Kernel timings call both flavours directly in this process. The end-to-end
section runs a full-front solve of the worked example in two child processes,
one per setting of EPSREP_NUMBA.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from epsrep import kernels
from epsrep._accel import HAVE_NUMBA
from epsrep.instances import generate, knapsack_spec


def best_of(func, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(size):
    rng = np.random.default_rng(0)
    prob = generate(knapsack_spec(16, index=0))
    lo, ub = prob.box()
    enum_args = (np.ascontiguousarray(prob.constraints), prob.rhs.copy(),
                 np.ascontiguousarray(prob.objectives), lo, ub, 10**8)

    Z = np.unique(rng.integers(0, 200, size=(size, 3)), axis=0)[::-1].copy()

    N = rng.integers(-100, 100, size=(size, 3)).astype(float)
    R = N[rng.choice(size, size // 20, replace=False)].copy()

    m, n = 20, 40
    A = np.hstack([rng.integers(1, 10, size=(m, n)).astype(float), np.eye(m)])
    b = rng.integers(50, 200, size=m).astype(float)
    c = np.concatenate([rng.integers(1, 20, size=n), np.zeros(m)]).astype(float)
    lo_s = np.zeros(n + m)
    hi_s = np.concatenate([np.full(n, 5.0), np.full(m, np.inf)])
    simplex_args = (A, b, c, lo_s, hi_s, 50_000, 1000)

    return [
        ("enumerate_outcomes n=16", kernels.enumerate_outcomes_nb,
         kernels.enumerate_outcomes_np, enum_args),
        (f"pareto_mask_sorted {len(Z)} pts", kernels.pareto_mask_sorted_nb,
         kernels.pareto_mask_sorted_np, (Z,)),
        (f"coverage {size}x{len(R)}", kernels.coverage_nb, kernels.coverage_np,
         (N, R, np.inf)),
        (f"uniformity {len(R)} pts", kernels.uniformity_nb, kernels.uniformity_np,
         (R, np.inf)),
        (f"bounded_simplex {m}x{n + m}", kernels.bounded_simplex_nb,
         kernels.bounded_simplex_np, simplex_args),
    ]


def end_to_end(flag):
    code = ("import time; from epsrep import run, illustrative_fixture; "
            "p = illustrative_fixture(); run(p, strategy='gpba-c', params=(3, 3)); "
            "t = time.perf_counter(); r = run(p, strategy='gpba-b'); "
            "print(time.perf_counter() - t, r.cardinality)")
    env = dict(os.environ, EPSREP_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    seconds, card = out.stdout.split()
    return float(seconds), int(card)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--size", type=int, default=20_000, help="points for the metric kernels")
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()

    if not HAVE_NUMBA:
        print("numba is not installed; both columns time the numpy code")
    print(f"{'kernel':34s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, nb, np_impl, fargs in kernel_cases(args.size):
        nb(*fargs)  # compile outside the timed region
        t_nb = best_of(nb, fargs, args.repeats)
        t_np = best_of(np_impl, fargs, args.repeats)
        print(f"{name:34s} {1e3 * t_nb:10.2f} {1e3 * t_np:10.2f} {t_np / t_nb:7.1f}x")

    if not args.skip_end_to_end:
        print()
        for flag in ("1", "0"):
            seconds, card = end_to_end(flag)
            print(f"full front of the worked example, EPSREP_NUMBA={flag}: "
                  f"{seconds:.2f} s, {card} points")


if __name__ == "__main__":
    main()
