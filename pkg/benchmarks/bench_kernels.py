"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from checkerboard import backend


def cases(n_enum, sites, steps):
    rng = np.random.default_rng(0)
    real = np.ascontiguousarray(rng.uniform(size=(sites, 2)))
    cplx = real + 1j * rng.uniform(size=(sites, 2))

    def simple(impl, vals, keep, rev):
        def run():
            v = vals
            for _ in range(steps):
                v = impl.step_simple(v, keep, rev, True)
        return run

    def causal(impl):
        def run():
            v = cplx
            for _ in range(steps):
                v = impl.step_causal(v, 0.9, 0.07, 0.03, True, False)
        return run

    return {
        f"path histogram n={n_enum}": lambda impl: lambda: impl.reversal_histogram_chunk(n_enum, True, 0, 1 << n_enum),
        f"step_simple real {steps}x{sites}": lambda impl: simple(impl, real, 0.95, 0.05),
        f"step_simple complex {steps}x{sites}": lambda impl: simple(impl, cplx, 1 - 0.05j, 0.05j),
        f"step_causal {steps}x{sites}": causal,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--sites", type=int, default=256)
    ap.add_argument("--steps", type=int, default=10_000)
    args = ap.parse_args()
    if backend.compiled_kernels is None:
        raise SystemExit("compiled extension not built; reinstall without CHECKERBOARD_NO_EXT")
    print(f"{'kernel':<34}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}")
    for name, make in cases(args.n, args.sites, args.steps).items():
        fast = min(timeit.repeat(make(backend.compiled_kernels), number=1, repeat=args.repeat))
        slow = min(timeit.repeat(make(backend.python_kernels), number=1, repeat=args.repeat))
        print(f"{name:<34}{fast:>14.4f}{slow:>14.4f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
