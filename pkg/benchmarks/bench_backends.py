"""Compare the compiled kernels against the pure-Python reference.

Times trig synthesis, the adjoint, and the radial Verlet integrator at a few
problem sizes; reports the median of repeated runs and the speedup.  Run
from a checkout with the package installed:

    python benchmarks/bench_backends.py [--repeats 9]
"""
import argparse
import statistics
import time

import numpy as np

from enorbit import _reference
from enorbit.loops import grid_for, random_loop

try:
    from enorbit import _speedups
except ImportError:
    _speedups = None


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _cases():
    for K, dim in [(5, 2), (15, 2), (31, 3)]:
        grid = grid_for(K)
        loop = random_loop(0, K, dim)
        times = grid.times()
        ks = loop.harmonics
        gf = np.asarray(
            _reference.trig_synth(loop.a, loop.b, ks, times), dtype=np.float64
        )
        yield (
            f"trig_synth      K={K:<3d} dim={dim} N={grid.N}",
            lambda be, a=loop.a, b=loop.b, k=ks, t=times: be.trig_synth(a, b, k, t),
        )
        yield (
            f"trig_adjoint    K={K:<3d} dim={dim} N={grid.N}",
            lambda be, g=gf, k=ks, t=times: be.trig_adjoint(g, k, t),
        )
    for steps in [2048, 8192]:
        q0 = np.array([1.0, 0.0])
        v0 = np.array([0.0, 1.0])
        dt = 2.0 * np.pi / steps
        yield (
            f"verlet_radial   steps={steps} (harmonic)",
            lambda be, q=q0, v=v0, d=dt, s=steps: be.verlet_radial(
                0, 0.5, 1.0, q, v, d, s, 1.0, 1e12
            ),
        )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=9)
    args = parser.parse_args()

    if _speedups is None:
        print("compiled backend not built; benchmarking the reference alone")

    header = f"{'kernel':<42} {'reference':>12} {'compiled':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, call in _cases():
        t_ref = _median_time(lambda: call(_reference), args.repeats)
        if _speedups is not None:
            t_cmp = _median_time(lambda: call(_speedups), args.repeats)
            print(
                f"{label:<42} {t_ref * 1e6:>10.1f}us {t_cmp * 1e6:>10.1f}us "
                f"{t_ref / t_cmp:>7.1f}x"
            )
        else:
            print(f"{label:<42} {t_ref * 1e6:>10.1f}us {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
