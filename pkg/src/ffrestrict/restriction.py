"""The extension operator f -> (f mu)^ and bounds on its norm R*(p -> q).

R*(2 -> 2) has a closed form: Plancherel gives ||(f mu)^||_2^2 = p^n sum |f|^2 mu^2,
so R*(2 -> 2)^2 = p^n max mu. For other q only lower bounds are computed: any
feasible f certifies ``ratio(f) <= R*``. Exponent formulas for the critical
and necessary thresholds live here too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .fourier import DEFAULT_METHOD, GridFn, dft, dual_exponent, idft, lp_mu_norm, lq_norm
from .measures import Measure, bohr_set

MAX_ITER = 500
REL_TOL = 1e-10
RESTARTS = 8


@dataclass
class RStarEstimate:
    p_exp: float
    q: float
    value: float
    kind: str  # "exact" | "witness" | "iterated"
    witness: Optional[GridFn] = None
    iterations: int = 0
    converged: bool = True
    seed: Optional[int] = None
    details: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {"p_exp": _jsonable(self.p_exp), "q": _jsonable(self.q), "value": self.value,
                "kind": self.kind, "iterations": self.iterations, "converged": self.converged,
                "seed": self.seed}


def _jsonable(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def _check_grid(f: GridFn, mu: Measure):
    if not f.same_grid(mu):
        raise ValueError(f"grid mismatch: {f.p}^{f.dim} vs {mu.p}^{mu.dim}")


def extension(f: GridFn, mu: Measure, method: str = DEFAULT_METHOD) -> GridFn:
    """(f mu)^(xi) = sum_x e(-x.xi) f(x) mu(x)."""
    _check_grid(f, mu)
    return dft(f.like(f.values * mu.density), method)


def _adjoint(h: GridFn, mu: Measure, method: str) -> GridFn:
    # <Tf, h> = <f, h^v>_{L^2(mu)}, so T* h = h^v restricted to Supp(mu).
    return h.like(idft(h, method).values * mu.support)


def extension_ratio(f: GridFn, mu: Measure, p_exp, q, method: str = DEFAULT_METHOD) -> float:
    """||(f mu)^||_q / ||f||_{L^p(mu)}."""
    den = lp_mu_norm(f, mu, p_exp)
    if den == 0.0:
        raise ValueError("f vanishes on the support of mu")
    return lq_norm(extension(f, mu, method), q) / den


def restriction_ratio(g: GridFn, mu: Measure, p_exp, q, method: str = DEFAULT_METHOD) -> float:
    """Dual form ||g^||_{L^p'(mu)} / ||g||_{q'}."""
    _check_grid(g, mu)
    den = lq_norm(g, dual_exponent(q))
    if den == 0.0:
        raise ValueError("g must be nonzero")
    return lp_mu_norm(dft(g, method), mu, dual_exponent(p_exp)) / den


def _duality_map(g: np.ndarray, q: float) -> np.ndarray:
    """A norming functional for g in l^q: |g|^(q-1) sgn(g), up to scale."""
    a = np.abs(g)
    top = a.max(initial=0.0)
    if top == 0.0:
        return np.zeros_like(g)
    phase = np.where(a > 0, g / np.where(a > 0, a, 1.0), 0.0)
    if math.isinf(q):
        h = np.zeros_like(g)
        k = int(np.argmax(a))
        h[k] = phase[k]
        return h
    return (a / top) ** (q - 1.0) * phase


def dual_witness(f: GridFn, mu: Measure, q, method: str = DEFAULT_METHOD) -> GridFn:
    """Restriction-side partner of an extension witness f: conj of J_q((f mu)^).

    At a maximiser of the extension ratio (p_exp = 2) this g attains the same
    value of ``restriction_ratio``.
    """
    Tf = extension(f, mu, method).values
    return f.like(np.conj(_duality_map(Tf, float(q))))


def _normalize(f: np.ndarray, mu: Measure) -> Optional[np.ndarray]:
    norm = lp_mu_norm(f, mu, 2)
    if norm == 0.0 or not math.isfinite(norm):
        return None
    return f / norm


def rstar_2_2_exact(mu: Measure, method: str = DEFAULT_METHOD, seed: int = 0,
                    max_iter: int = MAX_ITER, tol: float = 1e-13) -> RStarEstimate:
    """R*(2 -> 2) = sqrt(p^n max mu), cross-checked by power iteration on T*T."""
    if mu.total_mass <= 0:
        raise ValueError("zero measure")
    top = int(np.argmax(mu.density))
    value = math.sqrt(mu.size * float(mu.density[top]))
    witness = GridFn(mu.field, mu.dim, np.eye(1, mu.size, top)[0])

    rng = np.random.default_rng(seed)
    f = (rng.standard_normal(mu.size) + 1j * rng.standard_normal(mu.size)) * mu.support
    f = _normalize(f, mu)
    rayleigh = prev = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Tf = extension(witness.like(f), mu, method)
        rayleigh = lq_norm(Tf, 2) ** 2  # ||f||_{L^2(mu)} = 1
        if it > 1 and abs(rayleigh - prev) <= tol * rayleigh:
            converged = True
            break
        prev = rayleigh
        f = _normalize(_adjoint(Tf, mu, method).values, mu)
    power_value = math.sqrt(rayleigh)
    return RStarEstimate(
        p_exp=2.0, q=2.0, value=value, kind="exact", witness=witness, iterations=it,
        converged=converged, seed=seed,
        details={"power_iteration": power_value,
                 "cross_check_rel_err": abs(power_value - value) / value},
    )


def _starts(mu: Measure, restarts: int, seed: int):
    """Deterministic starts (1_Supp, then 1_A if present) followed by random ones."""
    support = mu.support.astype(np.complex128)
    yield support
    cube = mu.parts.get("A")
    if cube is not None:
        yield cube.mask.astype(np.complex128)
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        yield (rng.standard_normal(mu.size) + 1j * rng.standard_normal(mu.size)) * support


def rstar_lower_iterate(mu: Measure, q, restarts: int = RESTARTS, seed: int = 0,
                        max_iter: int = MAX_ITER, tol: float = REL_TOL,
                        method: str = DEFAULT_METHOD) -> RStarEstimate:
    """Lower bound for R*(2 -> q) by nonlinear power iteration.

    Each step applies T, the l^q duality map, T* and an L^2(mu)
    normalisation. q = 2 is accepted as a validation mode (it reduces to the
    linear power method).
    """
    q = float(q)
    if q < 2:
        raise ValueError(f"q must be >= 2 (got {q}); use rstar_2_2_exact for q = 2")
    if mu.support_size == 0:
        raise ValueError("empty support")
    best, best_f, best_start = -1.0, None, -1
    trace = []
    total_iters = 0
    all_converged = True
    for start_idx, f0 in enumerate(_starts(mu, restarts, seed)):
        f = _normalize(f0, mu)
        if f is None:
            continue
        prev = None
        converged = False
        for _ in range(max_iter):
            total_iters += 1
            Tf = extension(GridFn(mu.field, mu.dim, f), mu, method).values
            val = lq_norm(Tf, q)
            if val > best:
                best, best_f, best_start = val, f, start_idx
            trace.append(best)
            if prev is not None and abs(val - prev) <= tol * max(val, 1e-300):
                converged = True
                break
            prev = val
            h = _duality_map(Tf, q)
            nxt = _normalize(_adjoint(GridFn(mu.field, mu.dim, h), mu, method).values, mu)
            if nxt is None:
                converged = True
                break
            f = nxt
        all_converged &= converged
    witness = GridFn(mu.field, mu.dim, best_f)
    value = extension_ratio(witness, mu, 2, q, method)
    return RStarEstimate(
        p_exp=2.0, q=q, value=value, kind="iterated", witness=witness, iterations=total_iters,
        converged=all_converged, seed=seed,
        details={"best_start": best_start, "trace": trace, "restarts": restarts},
    )


def rstar_witness_cube(mu: Measure, q, method: str = DEFAULT_METHOD) -> RStarEstimate:
    """The ratio ||(1_A mu)^||_q / ||1_A||_{L^2(mu)} for the cube A inside mu."""
    A = mu.parts.get("A")
    if A is None:
        raise ValueError("measure carries no cube component 'A'")
    q = float(q)
    E = mu.parts.get("E")
    f = A.indicator
    Tf = extension(f, mu, method)
    numerator = lq_norm(Tf, q)
    denominator = lp_mu_norm(f, mu, 2)
    A_size = len(A)
    E_size = len(E) if E is not None else 0
    overlap = int(mu.meta.get("AE_overlap", 0))
    bohr = bohr_set(A, method=method)
    bohr_min = float(np.abs(Tf.values[bohr.members]).min())
    details = {
        "numerator": numerator,
        "denominator": denominator,
        "denominator_formula": math.sqrt(A_size + overlap) / math.sqrt(E_size + A_size),
        "bohr_size": len(bohr),
        "bohr_min": bohr_min,
        "bohr_floor": (0.1 - overlap / A_size) * A_size / (E_size + A_size),
        "numerator_floor": bohr_min * len(bohr) ** (0.0 if math.isinf(q) else 1.0 / q),
        "N": A.meta.get("N"),
    }
    return RStarEstimate(p_exp=2.0, q=q, value=numerator / denominator, kind="witness",
                         witness=f, details=details)


# --- exponent algebra -------------------------------------------------------------

def critical_q(n, alpha, beta) -> float:
    """(4n - 4 alpha + 2 beta) / beta; tends to 2 as beta -> inf."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if math.isinf(beta):
        return 2.0
    return (4 * n - 4 * alpha + 2 * beta) / beta


def sharpness_tau(n, alpha, beta, q) -> float:
    """Blow-up exponent (4n - 4 alpha + 2 beta - q beta) / (4q) of the cube witness."""
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    if math.isinf(q):
        return -beta / 4.0
    return (4 * n - 4 * alpha + 2 * beta - q * beta) / (4 * q)


def necessary_q(p_exp, n, alpha, beta) -> float:
    """Smallest q allowed by the cube construction for R*(p -> q) to stay bounded."""
    p_exp = float(p_exp)
    if math.isnan(p_exp) or p_exp < 1:
        raise ValueError(f"p must lie in [1, inf], got {p_exp}")
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if p_exp == 1.0:
        return math.inf
    base = (2 * n - 2 * alpha + beta) / beta
    if math.isinf(p_exp):
        return base
    return p_exp * base / (p_exp - 1.0)


def corollary_q_bound(beta, n) -> float:
    """4n / beta: enough when only the Fourier decay of mu is known."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return 4 * n / beta
