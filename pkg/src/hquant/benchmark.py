"""Benchmark the compiled kernels against the NumPy fallback.

Run as ``python -m hquant.benchmark``.  Times the three hot kernels
(reflection chain forward, forward+backward, packed Hamming scan) on both
implementations and reports the speedup.
"""

import argparse
import time

import numpy as np

from . import _reference
from ._backend import HAVE_COMPILED

if HAVE_COMPILED:
    from . import _core
else:
    _core = None


def _time(fn, repeats):
    fn()  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _bench_rotate(impl, vectors, x, repeats):
    def run():
        impl.apply_reflections(vectors, x.copy())

    return _time(run, repeats)


def _bench_train_step(impl, vectors, batch, grad, repeats):
    def run():
        acts = impl.record_reflections(vectors, batch)
        impl.backprop_reflections(vectors, acts, grad)

    return _time(run, repeats)


def _bench_hamming(impl, queries, db, repeats):
    def run():
        for q in queries:
            impl.hamming_counts(q, db, 0xFF)

    return _time(run, repeats)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=200_000, help="rows for the forward kernel")
    parser.add_argument("--bits", type=int, default=64, help="width k (= number of reflections)")
    parser.add_argument("--batch", type=int, default=128, help="training batch size")
    parser.add_argument("--steps", type=int, default=200, help="training steps per timing")
    parser.add_argument("--db", type=int, default=200_000, help="database rows for Hamming")
    parser.add_argument("--queries", type=int, default=50, help="queries for Hamming")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    k = args.bits
    vectors = rng.standard_normal((k, k))
    x_big = rng.standard_normal((args.rows, k))
    batch = rng.standard_normal((args.batch, k))
    grad = rng.standard_normal((args.batch, k))
    db = rng.integers(0, 256, size=(args.db, k // 8), dtype=np.uint8)
    queries = rng.integers(0, 256, size=(args.queries, k // 8), dtype=np.uint8)

    def train_many(impl):
        def run():
            for _ in range(args.steps):
                acts = impl.record_reflections(vectors, batch)
                impl.backprop_reflections(vectors, acts, grad)

        return _time(run, args.repeats)

    cases = [
        (
            f"rotate {args.rows} x {k}",
            lambda impl: _bench_rotate(impl, vectors, x_big, args.repeats),
        ),
        (f"train step x{args.steps} (b={args.batch}, k={k})", train_many),
        (
            f"hamming {args.queries} x {args.db}",
            lambda impl: _bench_hamming(impl, queries, db, args.repeats),
        ),
    ]

    impls = [("numpy", _reference)]
    if _core is not None:
        impls.append(("compiled", _core))
    else:
        print("compiled extension not available; timing the NumPy fallback only\n")

    width = max(len(name) for name, _ in cases)
    header = f"{'kernel'.ljust(width)}  " + "".join(f"{n:>12}" for n, _ in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, bench in cases:
        times = [bench(impl) for _, impl in impls]
        line = name.ljust(width) + "  " + "".join(f"{t:>10.4f} s" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>9.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
