"""Time the relay XOR decision kernel: numba loop vs vectorised numpy.

    python benchmarks/bench_xor_kernel.py [--n 200000] [--reps 5]
"""

import argparse
import time

import numpy as np

from pncvlc import _kernels


def best_of(fn, reps):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.n
    y, h_a, h_b = (rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(3))
    w = np.full(n, 10.0)

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    for exact in (True, False):
        label = "exact" if exact else "max-log"
        results = {}
        for b in backends:
            _kernels.xor_decide(y[:10], h_a[:10], h_b[:10], w[:10], exact, backend=b)  # compile
            results[b] = best_of(lambda: _kernels.xor_decide(y, h_a, h_b, w, exact, backend=b), args.reps)
        line = "  ".join(f"{b}: {t * 1e3:8.2f} ms ({n / t / 1e6:6.2f} Msym/s)" for b, t in results.items())
        if len(results) == 2:
            line += f"  speedup x{results['numpy'] / results['numba']:.1f}"
        print(f"{label:8s} n={n}  {line}")


if __name__ == "__main__":
    main()
