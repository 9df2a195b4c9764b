"""Benchmark the compiled kernels against the pure-Python backend.

Times the raw 1-D kernels, the batched per-slice operations they power,
and a representative end-to-end pipeline (representative function ->
induced saddle -> transform roundtrip).

    python benchmarks/bench_kernels.py [--n 241] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fitzcalc._backend import get_kernels
from fitzcalc.grids import make_grid
from fitzcalc.operators import OperatorSpec, fitzpatrick
from fitzcalc.saddles import fitzpatrick_transform, saddle_from_representative


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(kernels, n, repeat):
    rng = np.random.default_rng(5)
    x = np.linspace(-2, 2, n)
    s = np.linspace(-4, 4, n)
    v = np.ascontiguousarray(rng.normal(size=n).cumsum() * 0.2)
    V = np.ascontiguousarray(rng.normal(size=(n, n)).cumsum(axis=1) * 0.2)
    return {
        "conjugate_1d": timeit(lambda: kernels.conjugate_1d(x, v, s), repeat),
        "envelope_1d": timeit(lambda: kernels.envelope_1d(x, v), repeat),
        "conjugate_rows": timeit(lambda: kernels.conjugate_rows(x, V, s),
                                 repeat),
        "envelope_rows": timeit(lambda: kernels.envelope_rows(x, V), repeat),
    }


def bench_pipeline(n, repeat):
    g = make_grid(-2, 2, n)
    op = OperatorSpec.affine(1.0, 0.0)
    phi = fitzpatrick(op, g, g)

    def run():
        F = saddle_from_representative(phi)
        fitzpatrick_transform(F, g)

    return timeit(run, repeat)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=241,
                        help="nodes per axis (default 241)")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = {}
    for name in ("python", "cython"):
        try:
            backends[name] = get_kernels(name)
        except ImportError:
            print(f"{name} backend unavailable, skipping")
    results = {name: bench_kernels(k, args.n, args.repeat)
               for name, k in backends.items()}

    print(f"\nkernel timings, n = {args.n} (best of {args.repeat}):")
    keys = next(iter(results.values())).keys()
    header = f"{'kernel':<16}" + "".join(f"{b:>12}" for b in results)
    if len(results) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for key in keys:
        row = f"{key:<16}"
        for b in results:
            row += f"{results[b][key] * 1e3:>10.3f}ms"
        if len(results) == 2:
            ratio = results["python"][key] / results["cython"][key]
            row += f"{ratio:>9.1f}x"
        print(row)

    print("\nend-to-end (representative -> saddle -> transform roundtrip):")
    import fitzcalc._backend as backend_mod
    for name in backends:
        old = backend_mod.kernels
        backend_mod.kernels = backends[name]
        import fitzcalc.convex as convex_mod
        convex_mod.kernels = backends[name]
        t = bench_pipeline(args.n, max(2, args.repeat // 2))
        print(f"  {name:<8} {t * 1e3:9.1f}ms")
        backend_mod.kernels = old
        convex_mod.kernels = old


if __name__ == "__main__":
    main()
