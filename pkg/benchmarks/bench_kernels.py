"""Benchmark the compiled kernels against the pure-NumPy fallback.

Run:  python3 benchmarks/bench_kernels.py [--repeat 5]

Prints wall time per backend for the two hot kernels (capacity Gram logdets
and lattice metric statistics) plus the maximum aggregate discrepancy, which
must stay within floating-point tolerance (the backends use different
reduction orders, so results are close but not bitwise identical).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mdlvol._kernels import backends
from mdlvol.lattice import build_boolean_lattice
from mdlvol.numerics import JITTER_LADDER, RngStream


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_capacity(mods, repeat):
    rng = RngStream(2024)
    print("capacity_half_logdet  (batch x n x d gram + cholesky)")
    for b, n, d in ((2048, 10, 10), (2048, 20, 20), (256, 50, 100)):
        x = rng.generator(b, n, d).standard_normal((b, n, d))
        results = {}
        for name, mod in mods.items():
            secs, out = _time(lambda m=mod: m.capacity_half_logdet(x, 0.5), repeat)
            results[name] = (secs, out)
            print(f"  b={b:5d} n={n:3d} d={d:3d}  {name:>6}: {secs * 1e3:8.2f} ms")
        if len(results) == 2:
            a, c = (results[k][1] for k in results)
            print(f"  {'':24}max |diff| = {np.abs(a - c).max():.3g}")


def bench_lattice(mods, repeat):
    rng = RngStream(7)
    print("lattice_draw_stats  (metric build + jitter-laddered factorization)")
    for n, batch in ((4, 4096), (6, 1024), (8, 128)):
        lat = build_boolean_lattice(n)
        g = rng.generator(n)
        z = g.standard_normal((batch, lat.size))
        e = np.exp(z - z.max(axis=1, keepdims=True))
        delta = e / e.sum(axis=1, keepdims=True)
        eta = delta @ np.asarray(lat.zeta, dtype=np.float64).T
        eta[:, 0] = 1.0
        join_red = np.ascontiguousarray(lat.join_table[1:, 1:], dtype=np.int32)
        ladder = np.asarray(JITTER_LADDER)
        results = {}
        for name, mod in mods.items():
            secs, out = _time(
                lambda m=mod: m.lattice_draw_stats(eta, join_red, ladder), repeat)
            results[name] = (secs, out)
            print(f"  D={lat.size:4d} batch={batch:5d}  {name:>6}: {secs * 1e3:8.2f} ms")
        if len(results) == 2:
            (ha, _, oka), (hc, _, okc) = (results[k][1] for k in results)
            both = oka & okc
            print(f"  {'':24}max |diff| = {np.abs(ha[both] - hc[both]).max():.3g}"
                  f"  ok-mask equal: {bool(np.array_equal(oka, okc))}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions; best of N is reported")
    args = parser.parse_args()
    mods = backends()
    if len(mods) < 2:
        print("note: compiled backend unavailable; benchmarking pure only")
    bench_capacity(mods, args.repeat)
    bench_lattice(mods, args.repeat)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
