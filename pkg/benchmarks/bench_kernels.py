"""Benchmark the oracle enumeration kernels: compiled extension vs numpy.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from infopolicy import _kernels_np

try:
    from infopolicy import _kernels
except ImportError:
    _kernels = None


def _workload_pair(grid_n=801, n_queries=100, seed=0):
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, grid_n)
    pv = np.minimum(0.9, 0.2 + 0.5 * grid)
    vv = np.sqrt(0.3 + 0.7 * grid)
    cases = []
    for _ in range(n_queries):
        prior = rng.uniform(0.05, 0.95)
        rhs = rng.uniform(0.55, 0.8)
        lo = grid < prior
        hi = grid > prior
        cases.append((grid[lo], grid[hi], pv[lo], pv[hi], vv[lo], vv[hi], prior, rhs))
    return cases


def _workload_triple(grid_n=201, n_queries=5, seed=1):
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, grid_n)
    pv = np.minimum(0.9, 0.2 + 0.5 * grid)
    vv = np.sqrt(0.3 + 0.7 * grid)
    return [(grid, pv, vv, rng.uniform(0.2, 0.8), rng.uniform(0.55, 0.75))
            for _ in range(n_queries)]


def _time(fn, reps=3):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    pair_cases = _workload_pair()
    triple_cases = _workload_triple()
    rows = []
    backends = [("numpy", _kernels_np)]
    if _kernels is not None:
        backends.append(("compiled", _kernels))

    for name, impl in backends:
        t_pair = _time(lambda: [impl.best_pair(*c, 1e-12) for c in pair_cases])
        t_triple = _time(lambda: [impl.best_triple(*c, 1e-12) for c in triple_cases])
        rows.append((name, t_pair, t_triple))

    print(f"{'backend':10s} {'best_pair (100x801)':>22s} {'best_triple (5x201)':>22s}")
    for name, t_pair, t_triple in rows:
        print(f"{name:10s} {t_pair * 1e3:19.1f} ms {t_triple * 1e3:19.1f} ms")
    if len(rows) == 2:
        print(f"{'speedup':10s} {rows[0][1] / rows[1][1]:20.1f}x "
              f"{rows[0][2] / rows[1][2]:20.1f}x")
    if _kernels is None:
        print("compiled kernels not built; run `python3 setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
