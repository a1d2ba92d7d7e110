"""Compare the compiled and pure-Python sampling kernels.

Usage::

    python benchmarks/bench_kernels.py [--n 20000] [--repeat 3]

Each workload is run on both backends with the same seed; the script checks
that the outputs are bitwise identical and reports the best wall time.
"""
import argparse
import time

import numpy as np

from exchev import _backend
from exchev.extendibility import CondIIDSpec, DiscreteUnitMeanDF
from exchev.sampling import RngStream, sample_condiid_exponents, sample_maxlinear_exponents
from exchev.spectral import symmetrize


def workloads(n):
    fig = symmetrize(np.array([1 / 6, 1 / 3, 1 / 2]))
    wide = symmetrize(np.array([0.05, 0.1, 0.15, 0.2, 0.22, 0.28]))
    ca = CondIIDSpec.single(DiscreteUnitMeanDF.cuadras_auge(0.5), 0.0)
    rich = CondIIDSpec(0.3, [(0.6, DiscreteUnitMeanDF([0.0, 0.5, 1.5, 2.0], [0.2, 0.3, 0.3, 0.2])),
                             (0.4, DiscreteUnitMeanDF.point_mass())])
    return [
        ("maxlinear d=3 (6 atoms)", lambda be: sample_maxlinear_exponents(fig, n, RngStream(1), be)),
        ("maxlinear d=6 (720 atoms)",
         lambda be: sample_maxlinear_exponents(wide, max(1, n // 10), RngStream(2), be)),
        ("first passage CA d=5", lambda be: sample_condiid_exponents(ca, 5, n, RngStream(3), be)),
        ("first passage mixture d=8, b=0.3",
         lambda be: sample_condiid_exponents(rich, 8, n, RngStream(4), be)),
    ]


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000, help="rows per workload (default: %(default)s)")
    ap.add_argument("--repeat", type=int, default=3, help="timing repetitions (default: %(default)s)")
    args = ap.parse_args(argv)
    if "cython" not in _backend.AVAILABLE:
        print("compiled backend not built; only the Python kernels are available")
        return 1
    print(f"{'workload':36s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}  identical")
    for name, run in workloads(args.n):
        tp, xp = best_time(lambda: run("python"), args.repeat)
        tc, xc = best_time(lambda: run("cython"), args.repeat)
        same = np.array_equal(xp, xc)
        print(f"{name:36s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
