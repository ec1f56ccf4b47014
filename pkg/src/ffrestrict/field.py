"""Prime-field arithmetic, grid indexing and the additive character table."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Sequence

import numpy as np

# Dense grids larger than this are refused (complex128 => 1 GiB per array).
MAX_GRID = 1 << 26

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

Point = tuple


class GridSizeError(ValueError):
    """Raised when p**n exceeds MAX_GRID."""


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    for small in _MR_WITNESSES:
        if m % small == 0:
            return m == small
    d, s = m - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def check_grid_size(p: int, n: int) -> int:
    """Return p**n, raising GridSizeError above MAX_GRID."""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    size = p ** n
    if size > MAX_GRID:
        raise GridSizeError(f"grid {p}^{n} = {size} exceeds the cap of {MAX_GRID} entries")
    return size


def _character_table(p: int) -> np.ndarray:
    # Reduce k/p to the balanced range before scaling by 2*pi, so every entry
    # carries one rounding of the angle and e(-k) is the exact conjugate of e(k).
    k = np.arange(p, dtype=np.int64)
    k = np.where(2 * k > p, k - p, k)
    angle = (2.0 * np.pi) * (k / p)
    table = np.cos(angle) + 1j * np.sin(angle)
    table[0] = 1.0
    table.setflags(write=False)
    return table


@dataclass(frozen=True, eq=False)
class Field:
    """The prime field Z/pZ together with its table e(k) = exp(2 pi i k / p)."""

    p: int
    omega_table: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        p = int(self.p)
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "omega_table", _character_table(p))

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def table(self, sign: int) -> np.ndarray:
        """Character table oriented for e(sign * t / p)."""
        return self.omega_table if sign > 0 else _conj_table(self.p)

    def e(self, k: int) -> complex:
        return complex(self.omega_table[k % self.p])


@lru_cache(maxsize=64)
def _conj_table(p: int) -> np.ndarray:
    table = np.conj(_character_table(p))
    table.setflags(write=False)
    return table


def _check_point(x: Sequence[int], p: int) -> None:
    for c in x:
        if not 0 <= c < p:
            raise ValueError(f"coordinate {c} outside 0..{p - 1}")


def point_to_index(x: Sequence[int], field: Field) -> int:
    """Little-endian mixed radix: x_0 + x_1 p + ... + x_{n-1} p^{n-1}."""
    p = field.p
    _check_point(x, p)
    idx = 0
    for c in reversed(x):
        idx = idx * p + int(c)
    return idx


def index_to_point(idx: int, field: Field, n: int) -> Point:
    p = field.p
    if not 0 <= idx < p ** n:
        raise ValueError(f"index {idx} outside grid {p}^{n}")
    coords = []
    for _ in range(n):
        idx, c = divmod(idx, p)
        coords.append(c)
    return tuple(coords)


def dot_mod(x: Sequence[int], xi: Sequence[int], field: Field) -> int:
    if len(x) != len(xi):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(xi)}")
    return sum(int(a) * int(b) for a, b in zip(x, xi)) % field.p


def balanced_abs(v: int, field: Field) -> int:
    """Distance from v to 0 in Z/pZ, i.e. min(v, p - v)."""
    v = int(v) % field.p
    return min(v, field.p - v)


@lru_cache(maxsize=32)
def grid_coords(p: int, n: int) -> np.ndarray:
    """All points of F_p^n as an (p**n, n) int64 array in canonical index order."""
    size = check_grid_size(p, n)
    idx = np.arange(size, dtype=np.int64)
    coords = np.empty((size, n), dtype=np.int64)
    for i in range(n):
        idx, coords[:, i] = np.divmod(idx, p)
    coords.setflags(write=False)
    return coords


def grid_strides(p: int, n: int) -> np.ndarray:
    return p ** np.arange(n, dtype=np.int64)


def balanced_coords(p: int, n: int) -> np.ndarray:
    """balanced_abs applied to every coordinate of every grid point."""
    c = grid_coords(p, n)
    return np.minimum(c, p - c)


def primitive_root(p: int) -> int:
    if p == 2:
        return 1
    order = p - 1
    factors = set()
    m, d = order, 2
    while d * d <= m:
        while m % d == 0:
            factors.add(d)
            m //= d
        d += 1
    if m > 1:
        factors.add(m)
    for g in range(2, p):
        if all(pow(g, order // f, p) != 1 for f in factors):
            return g
    raise ArithmeticError(f"no primitive root mod {p}")  # unreachable for prime p
