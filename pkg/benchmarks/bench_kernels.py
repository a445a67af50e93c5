"""Compare the compiled kernel backend against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--trajs N] [--horizon T]
"""

import argparse
import time

import numpy as np

from quantstab._kernels import _pure

try:
    from quantstab._kernels import _core
except ImportError:
    _core = None


def bench(label, fn, repeats=3):
    best = min(timeit(fn) for _ in range(repeats))
    print(f"  {label:10s} {best * 1e3:10.1f} ms")
    return best


def timeit(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trajs", type=int, default=64)
    parser.add_argument("--horizon", type=int, default=100_000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n, T = args.trajs, args.horizon
    w = rng.standard_normal((n, T))
    x = rng.standard_normal((n, T))
    s0 = np.zeros(n)
    j0 = np.zeros(n, dtype=np.int64)
    alpha = np.array([0.6, 0.2])
    init = np.zeros((n, 2))
    thresholds = np.array([1.0])
    steps = np.array([-1, 2], dtype=np.int64)

    backends = [("pure", _pure)] + ([("compiled", _core)] if _core else [])
    cases = [
        ("ar", lambda k: k.ar_paths(w, alpha, init)),
        ("delta_mod", lambda k: k.delta_mod_paths(x, 1.0, s0)),
        ("gg", lambda k: k.gg_paths(x, thresholds, steps, j0, 0.0, 1.0)),
        ("zoom", lambda k: k.zoom_paths(w, s0, 2.0, 1.0, 3, j0, 0.0, 1.0,
                                        2, -1, 0.0)),
    ]

    print(f"{n} trajectories x {T} steps, best of 3")
    results = {}
    for case, run in cases:
        print(case)
        for name, kernel in backends:
            results[(case, name)] = bench(name, lambda: run(kernel))
        if _core:
            speedup = results[(case, "pure")] / results[(case, "compiled")]
            print(f"  {'speedup':10s} {speedup:10.1f}x")


if __name__ == "__main__":
    main()
