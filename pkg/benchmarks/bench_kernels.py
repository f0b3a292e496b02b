"""Time the classical-orbit kernels on both backends.

Runs every kernel from rdmflux._kernels once through the compiled path and
once through the interpreted fallback (the same source functions) and prints
per-kernel timings and speedups. Compilation happens in a warm-up call, so
it is excluded from the timings. Numerical agreement between the paths is
covered by tests/test_kernels.py (on chaotic workloads like these, round-off
differences grow exponentially, so bitwise comparison of long trajectories
is meaningless).

Usage: python benchmarks/bench_kernels.py [--repeat N] [--scale X]
"""

import argparse
import time

import numpy as np

from rdmflux import _kernels

# representative workloads: (args builder, step count)
WORKLOADS = {
    "standard_map_orbit": lambda n: (0.3, 1.9, 6.0, 1.0, n),
    "coupled_rotor_orbit": lambda n: (0.3, 1.9, 2.7, 0.4, 10.0, 10.0, 1.0, 2.0, n),
    "harper_flow_orbit": lambda n: (0.3, 1.9, 2.7, 0.4, 2.0, 2.0, 10.0,
                                    2 * np.pi, 2 * np.pi, 1.0e-2, n),
    "benettin_standard_map": lambda n: (0.3, 1.9, 6.0, 1.0, n, 1.0e-8),
    "benettin_coupled_rotor": lambda n: (0.3, 1.9, 2.7, 0.4, 10.0, 10.0, 1.0,
                                         2.0, n, 1.0e-8),
    "benettin_harper_flow": lambda n: (0.3, 1.9, 2.7, 0.4, 2.0, 2.0, 10.0,
                                       2 * np.pi, 2 * np.pi, 1.0e-2, n, 1.0e-8),
}

BASE_STEPS = {
    "standard_map_orbit": 1_000_000,
    "coupled_rotor_orbit": 500_000,
    "harper_flow_orbit": 100_000,
    "benettin_standard_map": 1_000_000,
    "benettin_coupled_rotor": 500_000,
    "benettin_harper_flow": 50_000,
}


def best_time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions per kernel (best is kept)")
    parser.add_argument("--scale", type=float, default=1.0,
                        help="multiply the default step counts")
    args = parser.parse_args()

    try:
        from numba import njit
        compiled = {name: njit(cache=True)(fn)
                    for name, fn in _kernels.PY_IMPLS.items()}
    except ImportError:
        compiled = None
        print("numba is not installed; timing the interpreted path only\n")

    header = f"{'kernel':<24} {'steps':>9} {'numpy':>10} {'numba':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, build in WORKLOADS.items():
        steps = max(1, int(BASE_STEPS[name] * args.scale))
        call_args = build(steps)
        pure = _kernels.PY_IMPLS[name]
        t_pure = best_time(pure, call_args, args.repeat)
        if compiled is None:
            print(f"{name:<24} {steps:>9} {t_pure:>9.3f}s {'n/a':>10} {'n/a':>8}")
            continue
        compiled[name](*call_args)  # warm-up excludes compilation
        t_jit = best_time(compiled[name], call_args, args.repeat)
        print(f"{name:<24} {steps:>9} {t_pure:>9.3f}s {t_jit:>9.3f}s "
              f"{t_pure / t_jit:>7.1f}x")
    print(f"\nactive package backend: {_kernels.backend()} "
          f"(set RDMFLUX_NUMBA=0 to force the interpreted fallback)")


if __name__ == "__main__":
    main()
