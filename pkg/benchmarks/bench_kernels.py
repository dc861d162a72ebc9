"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--reps 5]

Each kernel is timed on identical inputs under both backends, and the outputs
are checked for agreement before timings are reported.
"""
import argparse
import timeit

import numpy as np

from stakepool import _kernels_py

try:
    from stakepool import _kernels as _kernels_c
except ImportError:  # pragma: no cover
    _kernels_c = None


def solve_gap_case(k):
    out = 0.0
    for lam in np.linspace(0.34, 1.0, 200):
        out += k.solve_gap(0, 1.0, 1.0, 1.0, 0.5, 1.0, float(lam), 0.0, True)
        out += k.solve_gap(1, 0.5, 1.0, 1.0, 0.5, 1.0, float(lam), 0.0, True)
    return out


def make_mc_inputs(n=10_000, reps=100, seed=0):
    rng = np.random.default_rng(seed)
    costs = np.sort(rng.random((reps, n)), axis=1)
    choice_u = rng.random((reps, n))
    thresholds = np.full(reps, 0.78)
    return costs, choice_u, thresholds, n // 2, 0.9, float(n)


def mc_gaps_case(k, inputs):
    return k.mc_gaps(*inputs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--n", type=int, default=10_000)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled kernels not built; nothing to compare")
        return 1

    inputs = make_mc_inputs(n=args.n)
    a = solve_gap_case(_kernels_c)
    b = solve_gap_case(_kernels_py)
    assert abs(a - b) <= 1e-9 * abs(b), (a, b)
    ga, gb = mc_gaps_case(_kernels_c, inputs), mc_gaps_case(_kernels_py, inputs)
    assert np.allclose(ga, gb, rtol=1e-12, atol=1e-12)

    cases = [
        ("solve_gap x400", lambda k: solve_gap_case(k)),
        (f"mc_gaps 100 x n={args.n}", lambda k: mc_gaps_case(k, inputs)),
    ]
    print(f"{'kernel':<24}{'cython [ms]':>14}{'python [ms]':>14}{'speedup':>10}")
    for name, fn in cases:
        tc = min(timeit.repeat(lambda: fn(_kernels_c), number=1, repeat=args.reps))
        tp = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.reps))
        print(f"{name:<24}{tc * 1e3:>14.3f}{tp * 1e3:>14.3f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
