"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Both flavours are always importable, so one process times both. Each numba
kernel is called once before timing so compilation is excluded. With
NUMBA_DISABLE_JIT=1 the "numba" column runs as plain Python.
"""
import argparse
import time

import numpy as np

from ffrestrict import _kernels
from ffrestrict.field import Field, grid_coords, grid_strides
from ffrestrict.fourier import GridFn, dft


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(quick):
    rng = np.random.default_rng(0)
    line_shapes = [(101, 101), (13, 169), (1009, 1)] if quick else [(101, 101), (13, 169), (1009, 1), (5003, 1), (257, 257)]
    for p, lines in line_shapes:
        x = rng.standard_normal((lines, p)) + 1j * rng.standard_normal((lines, p))
        table = Field(p).table(-1)
        yield f"line_dft p={p} lines={lines}", _kernels.line_dft_numba, _kernels.line_dft_numpy, (x, table)
    for p, n in ([(7, 3), (31, 2)] if quick else [(7, 3), (31, 2), (13, 3)]):
        size = p ** n
        x = rng.standard_normal((size, 1)) + 0j
        args = (x, grid_coords(p, n), Field(p).table(-1))
        yield f"naive_dft p={p} n={n}", _kernels.naive_dft_numba, _kernels.naive_dft_numpy, args
    for p, n in ([(13, 2), (7, 3)] if quick else [(13, 2), (7, 3), (31, 2), (13, 3)]):
        size = p ** n
        f = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        g = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        args = (f, g, grid_coords(p, n), grid_strides(p, n), p)
        yield f"direct_convolve p={p} n={n}", _kernels.direct_convolve_numba, _kernels.direct_convolve_numpy, args


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller case list")
    args = ap.parse_args(argv)

    print(f"{'kernel':34s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, fast, slow, kargs in cases(args.quick):
        a = fast(*kargs)  # warm-up / compile
        b = slow(*kargs)
        diff = float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))
        t_fast = best_of(lambda: fast(*kargs), args.repeat)
        t_slow = best_of(lambda: slow(*kargs), args.repeat)
        print(f"{name:34s} {t_fast:10.4f} {t_slow:10.4f} {t_slow / t_fast:8.1f} {diff:9.1e}")

    rng = np.random.default_rng(1)
    print()
    print(f"{'full transform':34s} {'seconds':>10s}")
    for p, n in ((101, 2), (13, 3), (5003, 1)):
        f = GridFn.random(Field(p), n, rng)
        for method in ("direct", "rader"):
            dft(f, method)
            t = best_of(lambda: dft(f, method), args.repeat)
            print(f"{f'dft {method} p={p} n={n}':34s} {t:10.4f}")


if __name__ == "__main__":
    main()
