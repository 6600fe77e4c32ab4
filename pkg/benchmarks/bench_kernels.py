"""Compare the compiled and numpy trajectory-scan kernels.

    python benchmarks/bench_kernels.py --N 24 --R 0.05 --repeat 3
"""

import argparse
import time

import numpy as np

from targetsearch import _kernels_py
from targetsearch.geometry import bins_for_resolution, enumerate_trajectories


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=24)
    ap.add_argument("--R", type=float, default=0.05, help="rate; delta = 2^(-N R)")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    M = bins_for_resolution(args.N, 2.0 ** (-args.N * args.R))
    t0 = time.perf_counter()
    table = enumerate_trajectories(args.N, M)
    print(f"N={args.N} M={M} entries={len(table)} (table built in {time.perf_counter() - t0:.2f}s)")

    rng = np.random.default_rng(args.seed)
    E = (rng.random((args.N, M)) < 0.3).astype(np.uint8)
    backends = [("python", _kernels_py.scan_patterns)]
    try:
        from targetsearch import _kernels

        backends.insert(0, ("compiled", _kernels.scan_patterns))
    except ImportError:
        print("compiled extension not built; timing the fallback only")

    results = {}
    for name, fn in backends:
        t, out = best_time(lambda: fn(E, table.patterns), args.repeat)
        results[name] = (t, out)
        print(f"{name:9s} {t * 1e3:10.1f} ms  ({len(table) / t / 1e6:7.1f} M entries/s)")
    if len(results) == 2:
        (tc, oc), (tp, op) = results["compiled"], results["python"]
        same = oc[:3] == op[:3] and np.array_equal(np.asarray(oc[3]), np.asarray(op[3]))
        print(f"speedup {tp / tc:.1f}x, outputs identical: {same}")


if __name__ == "__main__":
    main()
