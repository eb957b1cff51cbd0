"""Timing comparison: compiled extension kernels vs the pure-Python twins.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Covers the three hot loops: trace integration (rectangle sums over long
power traces), the separable-fit inner solve (called a few hundred times
per exponential fit), and the spin payload used by local-process workers.
"""

import argparse
import math
import random
import timeit

from edgesplit import _kernels_py
from edgesplit.kernels import as_vector

try:
    from edgesplit import _kernels
except ImportError:
    _kernels = None


def build_trace(n=1_000_000, seed=11):
    rng = random.Random(seed)
    t = [0.0]
    for _ in range(n - 1):
        t.append(t[-1] + 0.01)
    p = [5.0 + rng.uniform(-1.0, 1.0) for _ in range(n)]
    return as_vector(t), as_vector(p)


def build_fit_data(n=100_000, seed=12):
    rng = random.Random(seed)
    x = as_vector(sorted(rng.uniform(0.5, 12.0) for _ in range(n)))
    y = as_vector(0.33 + 1.77 * math.exp(-0.98 * xi) + rng.gauss(0, 0.01)
                  for xi in x)
    return x, y


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def results_agree(a, b):
    if isinstance(a, tuple):
        return all(results_agree(x, y) for x, y in zip(a, b))
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions per case (best is kept)")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled kernels are not built; install the package with "
              "its extension to benchmark both backends")
        return 1

    t, p = build_trace()
    x, y = build_fit_data()

    cases = [
        ("rect_energy (1M samples)",
         lambda: _kernels.rect_energy(t, p),
         lambda: _kernels_py.rect_energy(t, p)),
        ("exp_solve_at_rate (100k points)",
         lambda: _kernels.exp_solve_at_rate(x, y, 0.98),
         lambda: _kernels_py.exp_solve_at_rate(x, y, 0.98)),
        ("quad_design_sums (100k points)",
         lambda: _kernels.quad_design_sums(x, y),
         lambda: _kernels_py.quad_design_sums(x, y)),
        ("spin (2M iterations)",
         lambda: _kernels.spin(2_000_000),
         lambda: _kernels_py.spin(2_000_000)),
    ]

    width = max(len(name) for name, _, _ in cases)
    print(f"{'kernel':<{width}}  {'compiled':>12}  {'pure':>12}  {'speedup':>8}")
    for name, compiled_fn, pure_fn in cases:
        agree = results_agree(compiled_fn(), pure_fn())
        compiled_s = best_of(compiled_fn, args.repeat)
        pure_s = best_of(pure_fn, args.repeat)
        print(f"{name:<{width}}  {compiled_s * 1e3:>10.2f}ms  "
              f"{pure_s * 1e3:>10.2f}ms  {pure_s / compiled_s:>7.1f}x"
              f"{'' if agree else '  RESULTS DISAGREE'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
