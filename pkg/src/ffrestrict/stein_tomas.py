"""Executable form of the L^2 extension argument for a concrete measure.

K = mu^v - delta_0 splits into an L^1 -> L^inf piece controlled by sup |K|
(the Fourier decay of mu) and an L^2 -> L^2 piece controlled by sup |K^|
(= max(p^n max mu - 1, 1), the regularity of mu). Interpolating the two
endpoints bounds f -> f * K from L^q' to L^q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import DEFAULT_METHOD, GridFn, convolve, dft, dual_exponent, idft, lq_norm
from .measures import Measure, SpectralReport, spectral_report
from .restriction import critical_q

# Direct convolution (the independent route) is used up to this grid size.
DIRECT_CONVOLVE_MAX = 1 << 14


@dataclass(frozen=True)
class KernelReport:
    sup_K: float
    sup_K_hat: float
    c_infty: float
    c_two: float


@dataclass
class ProbeStats:
    q: float
    trials: int
    seed: int
    max_ratio: float
    mean_ratio: float
    theta: float
    c_infty: float  # ||f*K||_inf / ||f||_1 operator norm, = sup |K|
    c_two: float  # ||f*K||_2 / ||f||_2 operator norm, = sup |K^|
    c_two_empirical: float
    ceiling: float
    max_plancherel_err: float
    ratios: list

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "ratios"}
        out["q"] = "inf" if math.isinf(self.q) else self.q
        return out


def kernel_K(mu: Measure, method: str = DEFAULT_METHOD) -> GridFn:
    """K = mu^v - delta_0."""
    vals = idft(mu.weights, method).values.copy()
    vals[0] -= 1.0
    return mu.weights.like(vals)


def kernel_bounds(mu: Measure, report: SpectralReport, method: str = DEFAULT_METHOD) -> KernelReport:
    """sup |K| and sup |K^| with their normalisations by p^(-beta_eff/2) and p^(n - alpha_eff)."""
    K = kernel_K(mu, method)
    sup_K = lq_norm(K, math.inf)
    sup_K_hat = lq_norm(dft(K, method), math.inf)
    p, n = mu.p, mu.dim
    # beta_eff = inf means the off-zero spectrum is exactly flat and K vanishes.
    c_infty = 0.0 if math.isinf(report.beta_eff) else sup_K * p ** (report.beta_eff / 2.0)
    c_two = sup_K_hat * p ** (report.alpha_eff - n)
    return KernelReport(sup_K=sup_K, sup_K_hat=sup_K_hat, c_infty=c_infty, c_two=c_two)


def interpolation_theta(q: float) -> float:
    """Weight on the (1 -> inf) endpoint: 1/q = (1 - theta)/2."""
    return 1.0 if math.isinf(q) else 1.0 - 2.0 / q


def convolution_inequality_probe(mu: Measure, q, trials: int, seed: int,
                                 report: SpectralReport | None = None,
                                 method: str = DEFAULT_METHOD) -> ProbeStats:
    """Sample ||f*K||_q / ||f||_q' over random complex f.

    Each trial also checks ||f*K||_2^2 = p^-n sum |f^|^2 |K^|^2, with f*K
    evaluated by the literal convolution sum on small grids. The ceiling is
    sup|K|^theta * sup|K^|^(1 - theta), the interpolation of the exact
    endpoint operator norms.
    """
    q = float(q)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if report is None:
        report = spectral_report(mu, method)
    q_crit = critical_q(mu.dim, report.alpha_eff, report.beta_eff)
    if q < q_crit * (1 - 1e-12):
        raise ValueError(f"q = {q} is below the critical exponent {q_crit:.6g} of this measure")
    K = kernel_K(mu, method)
    K_hat = dft(K, method).values
    c_inf = lq_norm(K, math.inf)
    c_two = float(np.abs(K_hat).max())
    theta = interpolation_theta(q)
    ceiling = c_inf ** theta * c_two ** (1.0 - theta)
    conv_method = "direct" if mu.size <= DIRECT_CONVOLVE_MAX else method
    q_dual = dual_exponent(q)

    ratios, l2_ratios, errs = [], [], []
    for t in range(trials):
        rng = np.random.default_rng(seed + t)
        f = GridFn.random(mu.field, mu.dim, rng)
        fK = convolve(f, K, conv_method)
        lhs = lq_norm(fK, 2) ** 2
        rhs = float(np.sum(np.abs(dft(f, method).values) ** 2 * np.abs(K_hat) ** 2)) / mu.size
        scale = max(lhs, rhs)
        errs.append(0.0 if scale == 0 else abs(lhs - rhs) / scale)
        ratios.append(lq_norm(fK, q) / lq_norm(f, q_dual))
        l2_ratios.append(math.sqrt(lhs) / lq_norm(f, 2))
    return ProbeStats(q=q, trials=trials, seed=seed, max_ratio=max(ratios),
                      mean_ratio=float(np.mean(ratios)), theta=theta, c_infty=c_inf, c_two=c_two,
                      c_two_empirical=max(l2_ratios), ceiling=ceiling,
                      max_plancherel_err=max(errs), ratios=ratios)
