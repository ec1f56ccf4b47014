"""Point sets and measures on F_p^n, and their measured regularity exponents.

Constructions: the uniform measure, the cube {1..N}^n, its Bohr neighbourhood,
Bernoulli random sets, the cube-plus-random-set measure used for sharpness,
and the discrete paraboloid.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from pathlib import Path

import numpy as np

from .field import Field, balanced_coords, check_grid_size, grid_coords, grid_strides
from .fourier import DEFAULT_METHOD, GridFn, dft

log = logging.getLogger(__name__)

GENERATOR = "numpy.random.PCG64"
BOHR_RATIO = 0.1
ETA = 0.01
# Off-zero Fourier coefficients below this are roundoff of an exactly flat spectrum.
FLAT_SPECTRUM_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class PointSet:
    """A subset of F_p^n held as sorted canonical indices."""

    field: Field
    dim: int
    members: np.ndarray
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        size = check_grid_size(self.field.p, self.dim)
        idx = np.unique(np.asarray(self.members, dtype=np.int64).reshape(-1))
        if idx.size and (idx[0] < 0 or idx[-1] >= size):
            raise ValueError(f"member index outside 0..{size - 1}")
        idx.setflags(write=False)
        object.__setattr__(self, "members", idx)

    def __len__(self):
        return int(self.members.size)

    def __contains__(self, index):
        i = np.searchsorted(self.members, index)
        return bool(i < self.members.size and self.members[i] == index)

    @property
    def p(self):
        return self.field.p

    def same_grid(self, other):
        return self.field == other.field and self.dim == other.dim

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.field.p ** self.dim, dtype=bool)
        m[self.members] = True
        m.setflags(write=False)
        return m

    @cached_property
    def indicator(self) -> GridFn:
        return GridFn(self.field, self.dim, self.mask.astype(np.float64))

    def points(self):
        return [tuple(int(c) for c in row) for row in grid_coords(self.p, self.dim)[self.members]]

    def intersection(self, other: "PointSet") -> "PointSet":
        _check_same_grid(self, other)
        return PointSet(self.field, self.dim, np.intersect1d(self.members, other.members))


@dataclass(frozen=True, eq=False)
class Measure:
    """A nonnegative function on F_p^n.

    ``meta`` is the JSON-friendly construction record; ``parts`` keeps the
    point sets a construction was assembled from (e.g. the cube ``"A"``).
    """

    field: Field
    dim: int
    density: np.ndarray
    meta: dict = dc_field(default_factory=dict)
    parts: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        size = check_grid_size(self.field.p, self.dim)
        d = np.array(self.density, dtype=np.float64).reshape(-1)
        if d.shape[0] != size:
            raise ValueError(f"expected {size} weights, got {d.shape[0]}")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("measure weights must be finite and nonnegative")
        d.setflags(write=False)
        object.__setattr__(self, "density", d)

    @property
    def p(self):
        return self.field.p

    @property
    def size(self):
        return self.density.shape[0]

    @cached_property
    def weights(self) -> GridFn:
        return GridFn(self.field, self.dim, self.density)

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.density))

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.density > 0))

    @property
    def support(self) -> np.ndarray:
        return self.density > 0

    def is_probability(self, tol=1e-12) -> bool:
        return abs(self.total_mass - 1.0) < tol

    def same_grid(self, other):
        return self.field == other.field and self.dim == other.dim


@dataclass(frozen=True)
class SpectralReport:
    alpha_eff: float
    beta_eff: float
    max_offzero_coeff: float
    max_density: float
    support_size: int
    mass_check: float


@dataclass(frozen=True)
class DecayCheck:
    support_ratio: float
    density_ratio: float
    beta_used: float
    support_ok: bool
    density_ok: bool

    @property
    def violation(self) -> bool:
        return not (self.support_ok and self.density_ok)


def _check_same_grid(a, b):
    if not a.same_grid(b):
        raise ValueError(f"grid mismatch: {a.field.p}^{a.dim} vs {b.field.p}^{b.dim}")


# --- constructions --------------------------------------------------------------------

def uniform_measure(field: Field, n: int) -> Measure:
    size = check_grid_size(field.p, n)
    return Measure(field, n, np.full(size, 1.0 / size), meta={"kind": "uniform"})


def atom_measure(field: Field, n: int, index: int = 0) -> Measure:
    size = check_grid_size(field.p, n)
    d = np.zeros(size)
    d[index] = 1.0
    return Measure(field, n, d, meta={"kind": "atom", "index": int(index)})


def normalized_measure(S: PointSet) -> Measure:
    """The probability measure 1_S / |S|."""
    if len(S) == 0:
        raise ValueError("cannot normalise an empty set")
    d = S.mask / float(len(S))
    return Measure(S.field, S.dim, d, meta={"kind": "normalized", "set": dict(S.meta), "size": len(S)},
                   parts={"S": S})


def cube_side(p: int, n: int, alpha: float, beta: float) -> int:
    """N = max(1, round(p^((alpha - beta/2)/n))), with halves rounded up."""
    return max(1, int(math.floor(p ** ((alpha - beta / 2.0) / n) + 0.5)))


def cube_set(field: Field, n: int, alpha: float, beta: float) -> PointSet:
    """The cube A = {1, ..., N}^n with N^n close to p^(alpha - beta/2)."""
    if not (0 < beta <= alpha < n):
        raise ValueError(f"need 0 < beta <= alpha < n, got alpha={alpha}, beta={beta}, n={n}")
    p = field.p
    N = cube_side(p, n, alpha, beta)
    if N > p:
        raise ValueError(f"cube side N={N} exceeds p={p}: parameters inconsistent with field size")
    check_grid_size(p, n)
    side = np.arange(1, N + 1, dtype=np.int64) % p
    grids = np.meshgrid(*([side] * n), indexing="ij")
    idx = sum(g.reshape(-1) * s for g, s in zip(grids, grid_strides(p, n)))
    return PointSet(field, n, idx, meta={"kind": "cube", "N": N, "alpha": alpha, "beta": beta})


def bohr_set(A: PointSet, threshold_ratio: float = BOHR_RATIO, method: str = DEFAULT_METHOD) -> PointSet:
    """All xi with |1_A^(xi)| >= threshold_ratio * |A|."""
    if len(A) == 0:
        raise ValueError("Bohr set of an empty set")
    spectrum = np.abs(dft(A.indicator, method).values)
    cut = threshold_ratio * len(A) * (1.0 - 1e-12)
    members = np.flatnonzero(spectrum >= cut)
    return PointSet(A.field, A.dim, members,
                    meta={"kind": "bohr", "threshold_ratio": threshold_ratio, "A_size": len(A)})


def bohr_box_radius(p: int, n: int, N: int) -> int:
    """Largest r with r <= p / (10 n N)."""
    return (p // (10 * n * N))


def bohr_box_mask(field: Field, n: int, N: int) -> np.ndarray:
    """Points whose coordinates all have balanced size at most p / (10 n N)."""
    r = bohr_box_radius(field.p, n, N)
    return np.all(balanced_coords(field.p, n) <= r, axis=1)


def bohr_box_count(p: int, n: int, N: int) -> int:
    return (2 * bohr_box_radius(p, n, N) + 1) ** n


def random_set(field: Field, n: int, alpha: float, seed: int) -> PointSet:
    """Keep each point independently with probability p^(alpha - n).

    Uniforms are drawn from PCG64 in canonical index order. An empty draw is
    retried with seed + 1 until nonempty; the seed actually used is recorded.
    """
    if not 0 < alpha <= n:
        raise ValueError(f"need 0 < alpha <= n, got {alpha}")
    size = check_grid_size(field.p, n)
    delta = min(1.0, field.p ** (alpha - n))
    used = int(seed)
    retries = 0
    while True:
        rng = np.random.Generator(np.random.PCG64(used % (1 << 64)))
        members = np.flatnonzero(rng.random(size) < delta)
        if members.size:
            break
        used += 1
        retries += 1
    meta = {"kind": "random", "alpha": alpha, "delta": delta, "seed": int(seed),
            "seed_used": used, "retries": retries, "generator": GENERATOR, "size": int(members.size)}
    return PointSet(field, n, members, meta=meta)


def combined_measure(A: PointSet, E: PointSet) -> Measure:
    """mu = (1_E + 1_A) / (|E| + |A|)."""
    _check_same_grid(A, E)
    total = len(A) + len(E)
    if total == 0:
        raise ValueError("both sets are empty")
    overlap = int(np.intersect1d(A.members, E.members, assume_unique=True).size)
    density = (A.mask.astype(np.float64) + E.mask) / total
    eta_warning = overlap > ETA * len(A)
    if eta_warning:
        log.debug("|A & E| = %d exceeds |A|/100 = %.2f", overlap, ETA * len(A))
    meta = {"kind": "combined", "A_size": len(A), "E_size": len(E), "AE_overlap": overlap,
            "eta_warning": bool(eta_warning), "A": dict(A.meta), "E": dict(E.meta)}
    return Measure(A.field, A.dim, density, meta=meta, parts={"A": A, "E": E})


def paraboloid_set(field: Field, n: int) -> PointSet:
    """P = {(x, x.x) : x in F^(n-1)}."""
    if n < 2:
        raise ValueError("the paraboloid needs n >= 2")
    p = field.p
    if p == 2:
        raise ValueError("the paraboloid needs an odd prime")
    check_grid_size(p, n)
    base = grid_coords(p, n - 1)
    last = np.sum(base * base, axis=1) % p
    idx = base @ grid_strides(p, n - 1) + last * p ** (n - 1)
    return PointSet(field, n, idx, meta={"kind": "paraboloid"})


# --- diagnostics --------------------------------------------------------------------------

def spectral_report(mu: Measure, method: str = DEFAULT_METHOD) -> SpectralReport:
    """Best exponents with max mu <= p^-alpha and max_{xi != 0} |mu^| <= p^(-beta/2).

    A flat off-zero spectrum (the uniform measure) reports beta_eff = inf.
    """
    mass = mu.total_mass
    if mass <= 0:
        raise ValueError("zero measure")
    if abs(mass - 1.0) > 1e-9:
        raise ValueError(f"expected a probability measure, total mass is {mass}")
    spectrum = dft(mu.weights, method).values
    offzero = float(np.abs(spectrum[1:]).max(initial=0.0))
    if offzero <= FLAT_SPECTRUM_ATOL:
        offzero = 0.0
    log_p = math.log(mu.p)
    top = float(mu.density.max())
    alpha_eff = -math.log(top) / log_p
    beta_eff = math.inf if offzero == 0.0 else -2.0 * math.log(offzero) / log_p
    return SpectralReport(alpha_eff=alpha_eff, beta_eff=beta_eff, max_offzero_coeff=offzero,
                          max_density=top, support_size=mu.support_size,
                          mass_check=float(spectrum[0].real))


def support_decay_check(report: SpectralReport, mu: Measure) -> DecayCheck:
    """Compare |Supp mu| with p^beta and max mu with p^(-beta/2).

    beta is capped at n: beyond that the Fourier condition says nothing more
    (an off-zero spectrum below p^(-n/2) already forces |Supp mu| > p^n / 2).
    """
    beta = min(report.beta_eff, float(mu.dim))
    p = mu.p
    support_ratio = mu.support_size / p ** beta
    density_ratio = float(mu.density.max()) * p ** (beta / 2.0)
    return DecayCheck(support_ratio=support_ratio, density_ratio=density_ratio, beta_used=beta,
                      support_ok=support_ratio >= 0.5, density_ok=density_ratio <= 2.0)


def write_pointset(S: PointSet, path) -> None:
    """Text format: header ``p n |S|``, then one canonical index per line."""
    lines = [f"{S.p} {S.dim} {len(S)}"]
    lines.extend(str(int(i)) for i in S.members)
    Path(path).write_text("\n".join(lines) + "\n")


def read_pointset(path) -> PointSet:
    text = Path(path).read_text().split()
    p, n, count = (int(t) for t in text[:3])
    members = np.array([int(t) for t in text[3:]], dtype=np.int64)
    if members.size != count:
        raise ValueError(f"header announces {count} members, file has {members.size}")
    return PointSet(Field(p), n, members)
