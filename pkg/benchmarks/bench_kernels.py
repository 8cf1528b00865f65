#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-python fallback.

Runs the union-find cluster labeling and the bridge survival scan on
identical inputs through both backends, checks that the outputs agree
exactly, and prints per-size timings with the speedup.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from gffperc import _kernels_py
from gffperc import graphs, percolation
from gffperc.rng import derive_seed

try:
    from gffperc import _kernels as _compiled
except ImportError:
    _compiled = None


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_clusters(repeat):
    print("cluster_labels (3-regular graph, half the edges open)")
    print("%10s %12s %12s %9s" % ("n", "cython", "python", "speedup"))
    for n in (1_000, 10_000, 100_000, 400_000):
        g = graphs.gen_random_regular(n, 3, seed=derive_seed(1, "bench", n))
        gen = np.random.default_rng(n)
        mask = (gen.random(g.m) < 0.5).astype(np.uint8)
        eu = np.ascontiguousarray(g.edges[:, 0])
        ev = np.ascontiguousarray(g.edges[:, 1])
        t_py, out_py = _best_of(
            lambda: _kernels_py.cluster_labels(g.n, eu, ev, mask), repeat)
        if _compiled is None:
            print("%10d %12s %12.4fs %9s" % (n, "-", t_py, "-"))
            continue
        t_cy, out_cy = _best_of(
            lambda: _compiled.cluster_labels(g.n, eu, ev, mask), repeat)
        assert np.array_equal(np.asarray(out_cy), np.asarray(out_py))
        print("%10d %11.4fs %11.4fs %8.1fx" % (n, t_cy, t_py, t_py / t_cy))


def bench_bridges(repeat):
    print()
    print("bridge_survival (a=b=1, h=0, exact minimum)")
    print("%10s %7s %12s %12s %9s" % ("runs", "steps", "cython", "python",
                                      "speedup"))
    for runs, steps in ((2_000, 250), (10_000, 500), (20_000, 1_000)):
        gen = np.random.default_rng(runs + steps)
        normals = gen.standard_normal((runs, steps))
        unif = gen.random(runs)
        t_py, out_py = _best_of(
            lambda: _kernels_py.bridge_survival(normals, unif, 1.0, 1.0, 0.0,
                                                True), repeat)
        if _compiled is None:
            print("%10d %7d %12s %12.4fs %9s" % (runs, steps, "-", t_py, "-"))
            continue
        t_cy, out_cy = _best_of(
            lambda: _compiled.bridge_survival(normals, unif, 1.0, 1.0, 0.0,
                                              True), repeat)
        assert np.array_equal(np.asarray(out_cy), np.asarray(out_py))
        print("%10d %7d %11.4fs %11.4fs %8.1fx"
              % (runs, steps, t_cy, t_py, t_py / t_cy))
    want = percolation.open_probability(1.0, 1.0, 0.0)
    print("closed-form survival at (1,1): %.4f" % want)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions, best-of (default 3)")
    args = parser.parse_args()
    if _compiled is None:
        print("compiled kernels not available; timing the fallback only")
    bench_clusters(args.repeat)
    bench_bridges(args.repeat)


if __name__ == "__main__":
    main()
