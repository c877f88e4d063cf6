"""Time the compiled and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--pool 4000] [--steps 20] [--repeat 3]
"""

import argparse
import math
import timeit

import numpy as np

from ftsens import kernels


def bench_greedy(backend, orbits, delta, repeat):
    return min(timeit.repeat(lambda: kernels.greedy_separated(orbits, delta, backend=backend),
                             number=1, repeat=repeat))


def bench_rk4(backend, pts, steps, repeat):
    def run():
        kernels.rk4_advance(pts.copy(), steps, 0.05, 0.0, 0.0, math.sqrt(2) - 1, backend=backend)
    return min(timeit.repeat(run, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pool", type=int, default=4000)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    orbits = rng.random((args.pool, args.steps + 1, 2))
    pts = rng.random((args.pool, 2))
    backends = ["numpy"] + (["cython"] if kernels._core is not None else [])
    if len(backends) == 1:
        print("compiled extension not built; timing numpy only")

    rows = []
    for name, fn, data in (("greedy_separated", bench_greedy, (orbits, 0.05)),
                           ("rk4_advance", bench_rk4, (pts, args.steps * 20))):
        times = {b: fn(b, *data, args.repeat) for b in backends}
        rows.append((name, times))

    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, times in rows:
        line = f"{name:<18}" + "".join(f"{times[b]:>11.4f}s" for b in backends)
        if "cython" in times:
            line += f"{times['numpy'] / times['cython']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
