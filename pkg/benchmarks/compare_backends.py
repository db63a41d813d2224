#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Times the two hot loops (per-bin period sampling, classical collector)
on both backends and verifies that results are bit-identical. Run from
the repository root:

    python benchmarks/compare_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from qcoupon.kernels import _pykernels

try:
    from qcoupon.kernels import _ckernels
except ImportError:
    _ckernels = None


def _bg(seed, index):
    return np.random.PCG64(np.random.SeedSequence([seed, index]))


def bench_periods(backend, n, periods, chunk):
    thresholds = np.full(n, 2.7e-5)
    thresholds[-1] = 0.743
    is_missing = np.zeros(n, dtype=np.uint8)
    is_missing[-1] = 1
    accepted = correct = 0
    start = time.perf_counter()
    done = 0
    index = 0
    while done < periods:
        count = min(chunk, periods - done)
        a, c = backend.period_chunk_counts(_bg(42, index), thresholds, is_missing, 1, count)
        accepted += a
        correct += c
        done += count
        index += 1
    elapsed = time.perf_counter() - start
    return elapsed, (accepted, correct)


def bench_collector(backend, k, runs):
    total = 0
    start = time.perf_counter()
    for r in range(runs):
        total += backend.collector_run(_bg(7, r), k)
    elapsed = time.perf_counter() - start
    return elapsed, total


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled extension not built; run `python setup.py build_ext --inplace`")
        return

    periods = 20_000 if args.quick else 100_000
    runs = 2_000 if args.quick else 10_000
    n, k = 4000, 1999
    chunk = max(1, 4_000_000 // n)

    print(f"period sampling: n={n}, periods={periods}")
    rows = []
    for backend in (_ckernels, _pykernels):
        elapsed, counts = bench_periods(backend, n, periods, chunk)
        rate = periods * n / elapsed / 1e6
        rows.append((backend.BACKEND, elapsed, rate, counts))
        print(f"  {backend.BACKEND:9s} {elapsed:7.2f} s   {rate:8.1f} Mdraw/s   counts={counts}")
    assert rows[0][3] == rows[1][3], "backends disagree"
    print(f"  speedup: {rows[1][1] / rows[0][1]:.1f}x\n")

    print(f"classical collector: k={k}, runs={runs}")
    rows = []
    for backend in (_ckernels, _pykernels):
        elapsed, total = bench_collector(backend, k, runs)
        rate = total / elapsed / 1e6
        rows.append((backend.BACKEND, elapsed, rate, total))
        print(f"  {backend.BACKEND:9s} {elapsed:7.2f} s   {rate:8.1f} Mdraw/s   total={total}")
    assert rows[0][3] == rows[1][3], "backends disagree"
    print(f"  speedup: {rows[1][1] / rows[0][1]:.1f}x")


if __name__ == "__main__":
    main()
