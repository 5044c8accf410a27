"""Compare the compiled and numpy pivot kernels.

Times single pivots on random dense tableaux, then full LP relaxation
solves of generated instances with each kernel swapped in.  Both kernels
must produce identical tableaux, so objectives are checked for equality.

    python benchmarks/bench_simplex.py [--repeats 20] [--csv out.csv]
"""

from __future__ import annotations

import argparse
import csv
import sys
import time

import numpy as np

from milp_retrieval.generators import GeneratorSpec, generate_instance
from milp_retrieval.lp import _pykernel, kernel, solve_lp_relaxation

try:
    from milp_retrieval.lp import _ckernel
except ImportError:
    _ckernel = None

SHAPES = [(50, 100), (150, 450), (400, 1200)]
INSTANCES = [("SC", {}), ("CA", {}), ("CFL", {}), ("TSP", {})]


def _best(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def random_tableau(shape, rng):
    T = rng.standard_normal(shape)
    T[rng.random(shape) < 0.7] = 0.0
    T[shape[0] // 2, shape[1] // 3] = 1.5
    return T


def bench_pivot(pivot, T0, repeats):
    r, q = T0.shape[0] // 2, T0.shape[1] // 3
    work = T0.copy()

    def run():
        np.copyto(work, T0)
        pivot(work, r, q)

    return _best(run, repeats), work


def bench_solve(pivot, inst, repeats):
    kernel.pivot = pivot
    try:
        sol = None

        def run():
            nonlocal sol
            sol = solve_lp_relaxation(inst)

        return _best(run, repeats), sol
    finally:
        kernel.pivot = _ckernel.pivot if _ckernel is not None else _pykernel.pivot


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--solve-repeats", type=int, default=3)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    if _ckernel is None:
        print("compiled kernel not built; run `pip install -e .` first", file=sys.stderr)
        return 1

    rng = np.random.default_rng(0)
    rows = []
    for shape in SHAPES:
        T0 = random_tableau(shape, rng)
        tp, a = bench_pivot(_pykernel.pivot, T0, args.repeats)
        tc, b = bench_pivot(_ckernel.pivot, T0, args.repeats)
        assert np.array_equal(a, b), "kernels disagree"
        rows.append(["pivot", f"{shape[0]}x{shape[1]}", tp, tc])
    for cid, params in INSTANCES:
        inst = generate_instance(GeneratorSpec(cid, params, 0))
        tp, sp = bench_solve(_pykernel.pivot, inst, args.solve_repeats)
        tc, sc = bench_solve(_ckernel.pivot, inst, args.solve_repeats)
        assert sp.obj == sc.obj and sp.iterations == sc.iterations, "solves disagree"
        rows.append(["lp", f"{cid} {inst.n_cons}x{inst.n_vars} ({sc.iterations} it)", tp, tc])

    print(f"{'case':6s} {'size':32s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for kind, size, tp, tc in rows:
        print(f"{kind:6s} {size:32s} {tp * 1e3:10.3f} {tc * 1e3:10.3f} {tp / tc:8.2f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["case", "size", "python_s", "cython_s"])
            w.writerows(rows)
    speed = [tp / tc for kind, _, tp, tc in rows if kind == "lp"]
    print(f"lp_speedup_geomean={np.exp(np.mean(np.log(speed))):.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
