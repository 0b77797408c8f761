"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best wall time per backend and the speed-up for the lattice
sums behind the constants and lemma checks, and for the pointwise
nonlinearity evaluated once per time step.
"""

import argparse
import timeit

import numpy as np

from chimex import _backend

CASES = {
    "lattice_sum d=2 R=400": ("lattice_sum", (2, 0.0, 400.0, 400, 1.0, 0.0, 0.0, -4.0, 1e-6, 2.0)),
    "lattice_sum d=3 R=60": ("lattice_sum", (3, 0.0, 60.0, 60, 1.0, 0.0, 0.0, 4.0, 1e-4, 2.0)),
    "lattice_sum d=2 m400 R=200": ("lattice_sum", (2, 0.0, 200.0, 200, 1.0, -2e-5, 2.0, -2.0, 1e-5, 2.0)),
}
FIELD_SIZES = {"nonlinear 2D M=270": 270**2, "nonlinear 3D M=72": 72**3}


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    names = sorted(_backend.AVAILABLE)
    if "cython" not in names:
        print("compiled extension not built; only the NumPy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'case':<30}" + "".join(f"{n:>14}" for n in names) + f"{'speed-up':>12}")
    for label, (fname, fargs) in CASES.items():
        times = {n: best_time(lambda: getattr(_backend.get(n), fname)(*fargs), args.repeat) for n in names}
        vals = {n: getattr(_backend.get(n), fname)(*fargs) for n in names}
        if len(vals) == 2:
            a, b = vals.values()
            assert abs(a - b) <= 1e-12 * abs(a), (label, vals)
        _print_row(label, names, times)
    for label, size in FIELD_SIZES.items():
        u = rng.uniform(-1.2, 1.2, size)
        out = np.empty_like(u)
        times = {n: best_time(lambda: _backend.get(n).nonlinear_potential(u, out), args.repeat) for n in names}
        _print_row(label, names, times)


def _print_row(label, names, times):
    row = f"{label:<30}" + "".join(f"{times[n] * 1e3:>11.3f} ms" for n in names)
    if "cython" in times:
        row += f"{times['python'] / times['cython']:>11.1f}x"
    print(row)


if __name__ == "__main__":
    main()
