"""Hot loops of the transform layer, in a numba flavour and a numpy flavour.

Both flavours are always importable so they can be benchmarked against each
other; the un-suffixed names are bound to whichever backend ``_accel``
selected. ``table`` is a length-p character table, ``table[t] = e(s*t/p)``,
already oriented for the direction of the transform. Every kernel sums in
canonical index order, so numba results do not depend on scheduling.
"""
from functools import lru_cache

import numpy as np

from ._accel import USE_NUMBA, njit
from .field import grid_coords, grid_strides

# Upper bound on the number of complex entries in a numpy scratch block.
_BLOCK = 1 << 20


# --- length-p line transforms ------------------------------------------------

@njit
def _line_dft_few(lines, table):
    n_lines, p = lines.shape
    out = np.empty((n_lines, p), dtype=np.complex128)
    for l in range(n_lines):
        for k in range(p):
            acc = 0j
            t = 0
            for j in range(p):
                acc += lines[l, j] * table[t]
                t += k
                if t >= p:
                    t -= p
            out[l, k] = acc
    return out


@njit
def _line_dft_many(lines, table):
    n_lines, p = lines.shape
    # Split planes with the lines innermost: the l loop is independent and
    # vectorises, while every output still sums over j in order.
    xr = np.ascontiguousarray(lines.real.T)
    xi = np.ascontiguousarray(lines.imag.T)
    cr = table.real.copy()
    ci = table.imag.copy()
    acc_r = np.zeros(n_lines)
    acc_i = np.zeros(n_lines)
    out = np.empty((n_lines, p), dtype=np.complex128)
    for k in range(p):
        acc_r[:] = 0.0
        acc_i[:] = 0.0
        t = 0
        for j in range(p):
            wr = cr[t]
            wi = ci[t]
            for l in range(n_lines):
                acc_r[l] += xr[j, l] * wr - xi[j, l] * wi
                acc_i[l] += xr[j, l] * wi + xi[j, l] * wr
            t += k
            if t >= p:
                t -= p
        for l in range(n_lines):
            out[l, k] = complex(acc_r[l], acc_i[l])
    return out


@njit
def line_dft_numba(lines, table):
    if lines.shape[0] < 8:
        return _line_dft_few(lines, table)
    return _line_dft_many(lines, table)


def line_dft_numpy(lines, table):
    n_lines, p = lines.shape
    out = np.empty((n_lines, p), dtype=np.complex128)
    j = np.arange(p, dtype=np.int64)
    step = max(1, _BLOCK // p)
    for k0 in range(0, p, step):
        k = np.arange(k0, min(p, k0 + step), dtype=np.int64)
        out[:, k0:k0 + len(k)] = lines @ table[np.outer(j, k) % p]
    return out


# --- full double-sum transform (correctness oracle) --------------------------

@njit
def naive_dft_numba(values, coords, table):
    size, batch = values.shape
    n = coords.shape[1]
    p = table.shape[0]
    out = np.zeros((size, batch), dtype=np.complex128)
    for xi in range(size):
        for x in range(size):
            t = 0
            for i in range(n):
                t += coords[x, i] * coords[xi, i]
            w = table[t % p]
            for b in range(batch):
                out[xi, b] += values[x, b] * w
    return out


def naive_dft_numpy(values, coords, table):
    size = values.shape[0]
    p = table.shape[0]
    out = np.empty(values.shape, dtype=np.complex128)
    step = max(1, _BLOCK // size)
    for r0 in range(0, size, step):
        rows = coords[r0:r0 + step]
        out[r0:r0 + len(rows)] = table[(rows @ coords.T) % p] @ values
    return out


# --- direct cyclic convolution on F_p^n --------------------------------------

@njit
def direct_convolve_numba(f, g, coords, strides, p):
    # Loop over y outermost and add g(y) * f(. - y) into every output; each
    # out[x] still accumulates its terms in canonical y order.
    size = f.shape[0]
    n = coords.shape[1]
    n_rows = size // p
    out = np.zeros(size, dtype=np.complex128)
    for y in range(size):
        gy = g[y]
        y0 = coords[y, 0]
        for r in range(n_rows):
            x = r * p
            base = 0
            for i in range(1, n):
                d = coords[x, i] - coords[y, i]
                if d < 0:
                    d += p
                base += d * strides[i]
            for x0 in range(y0):
                out[x + x0] += f[base + x0 - y0 + p] * gy
            for x0 in range(y0, p):
                out[x + x0] += f[base + x0 - y0] * gy
    return out


# Grids up to this many (x, y) pairs keep their difference-index matrix cached.
_DIFF_CACHE_MAX = 1 << 24


@lru_cache(maxsize=4)
def _difference_index(p, n):
    coords = grid_coords(p, n)
    diff = np.zeros((coords.shape[0], coords.shape[0]), dtype=np.int32)
    for i, s in enumerate(grid_strides(p, n)):
        diff += (((coords[:, None, i] - coords[None, :, i]) % p) * s).astype(np.int32)
    diff.setflags(write=False)
    return diff


def direct_convolve_numpy(f, g, coords, strides, p):
    size = f.shape[0]
    if size * size <= _DIFF_CACHE_MAX:
        return f[_difference_index(p, coords.shape[1])] @ g
    out = np.empty(size, dtype=np.complex128)
    step = max(1, _BLOCK // size)
    for r0 in range(0, size, step):
        rows = coords[r0:r0 + step]
        diff = (rows[:, None, :] - coords[None, :, :]) % p
        out[r0:r0 + len(rows)] = f[diff @ strides] @ g
    return out


if USE_NUMBA:
    line_dft = line_dft_numba
    naive_dft = naive_dft_numba
    direct_convolve = direct_convolve_numba
else:
    line_dft = line_dft_numpy
    naive_dft = naive_dft_numpy
    direct_convolve = direct_convolve_numpy
