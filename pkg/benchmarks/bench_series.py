"""Benchmark the compiled series kernels against the pure-NumPy fallback.

Times gegenbauer_sum and wrapped_gaussian_sum on workloads shaped like real
quadrature calls (a panel of nodes, a few hundred series terms) and reports
the speedup.  Both backends are imported directly, so a single run compares
them regardless of which one the package selected at import time.

The compiled path wins at panel-sized batches (64 nodes, where per-term NumPy
dispatch dominates the fallback) and the two roughly tie once thousands of
nodes amortize the vectorized ops, so the default sweeps several sizes.

Usage:
    python3 benchmarks/bench_series.py [--repeats 7] [--nodes 64 ...]
"""

import argparse
import time

import numpy as np

from heatkl._series import BACKEND, _fallback

try:
    from heatkl._series import _core
except ImportError:
    _core = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def gegenbauer_case(nodes, terms, alpha, t):
    # weights decay like a heat trace so the workload matches sphere_density
    rng = np.random.default_rng(0)
    x = np.cos(rng.uniform(0.0, np.pi, size=nodes))
    l = np.arange(terms, dtype=np.float64)
    weights = (2.0 * l + 2.0 * alpha) * np.exp(-l * (l + 2.0 * alpha) * t / 2.0)
    return x, weights, alpha


def wrapped_case(nodes, period, t, nmax):
    rng = np.random.default_rng(1)
    x = rng.uniform(0.0, period, size=nodes)
    return x, period, t, nmax


def compare(name, fn_py, fn_cy, call_args, repeats):
    t_py = best_of(lambda: fn_py(*call_args), repeats)
    if fn_cy is None:
        print("%-34s %12.3f %12s %9s" % (name, 1e3 * t_py, "-", "-"))
        return
    t_cy = best_of(lambda: fn_cy(*call_args), repeats)
    np.testing.assert_allclose(fn_cy(*call_args), fn_py(*call_args),
                               rtol=1e-12, atol=1e-300)
    print("%-34s %12.3f %12.3f %8.1fx"
          % (name, 1e3 * t_py, 1e3 * t_cy, t_py / t_cy))


def run(args):
    print("backend selected at import: %s" % BACKEND)
    if _core is None:
        print("compiled extension not built; timing fallback only")

    cy_geg = None if _core is None else _core.gegenbauer_sum
    cy_wrap = None if _core is None else _core.wrapped_gaussian_sum

    for nodes in args.nodes:
        print()
        print("nodes=%d, terms=%d" % (nodes, args.terms))
        print("%-34s %12s %12s %9s"
              % ("kernel", "python [ms]", "cython [ms]", "speedup"))
        for name, alpha in (("gegenbauer alpha=1/2 (S^2 shape)", 0.5),
                            ("gegenbauer alpha=1   (S^3 shape)", 1.0),
                            ("gegenbauer alpha=0   (S^1 shape)", 0.0)):
            call_args = gegenbauer_case(nodes, args.terms, alpha, 0.002)
            compare(name, _fallback.gegenbauer_sum, cy_geg, call_args,
                    args.repeats)
        call_args = wrapped_case(nodes, 2.0 * np.pi, 0.01, 40)
        compare("wrapped gaussian (torus shape)",
                _fallback.wrapped_gaussian_sum, cy_wrap, call_args,
                args.repeats)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=7, help="timing repeats, best is kept")
    ap.add_argument("--nodes", type=int, nargs="+", default=[64, 256, 1024, 4096],
                    help="evaluation nodes per call (one table per size)")
    ap.add_argument("--terms", type=int, default=300, help="series terms per call")
    args = ap.parse_args()
    if args.repeats < 1 or min(args.nodes) < 1 or args.terms < 2:
        ap.error("repeats and nodes must be >= 1, terms >= 2")
    run(args)


if __name__ == "__main__":
    main()
