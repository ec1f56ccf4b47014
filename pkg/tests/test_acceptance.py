"""Acceptance gate: one test per criterion, each at its stated tolerance."""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from ffrestrict.experiments import ExperimentConfig, run_boundedness, run_sharpness
from ffrestrict.field import Field, is_prime
from ffrestrict.fourier import dft
from ffrestrict.measures import (
    atom_measure, bohr_box_mask, bohr_set, combined_measure, cube_set, paraboloid_set,
    random_set, spectral_report, uniform_measure,
)
from ffrestrict.restriction import (
    corollary_q_bound, critical_q, necessary_q, rstar_2_2_exact, rstar_lower_iterate, sharpness_tau,
)
from ffrestrict.stein_tomas import convolution_inequality_probe, kernel_bounds, kernel_K

from conftest import fourier_identity_errors
from test_measures import SALEM_CONFIGS, salem_failures

IDENTITY_GRIDS = [(p, n) for p in (3, 5, 7, 101) for n in (1, 2)] + [(13, 3)]


@pytest.fixture(scope="module")
def sharpness_runs():
    t0 = time.perf_counter()
    results = run_sharpness(ExperimentConfig())
    return results, time.perf_counter() - t0


def test_c01_fourier_identities(criterion):
    t0 = time.perf_counter()
    worst = dict.fromkeys(("plancherel", "inversion", "convolution", "convolution_sampled", "symmetry"), 0.0)
    for p, n in IDENTITY_GRIDS:
        errs = fourier_identity_errors(p, n, count=100, seed=1000 * p + n)
        for k in worst:
            worst[k] = max(worst[k], errs[k])
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-9 and elapsed < 10.0
    detail = ", ".join(f"{k}={v:.1e}" for k, v in worst.items())
    assert criterion(1, ok, f"Fourier identities, max rel err {detail}; {elapsed:.1f}s (< 10s)")


def test_c02_gauss_sum_exactness(criterion):
    worst = 0.0
    for p in (3, 5, 7, 11, 13):
        for n in (2, 3):
            spec = np.abs(dft(paraboloid_set(Field(p), n).indicator).values)[1:]
            target = p ** ((n - 1) / 2)
            worst = max(worst, float(np.minimum(spec, np.abs(spec - target)).max()))
    ok = worst < 1e-8
    assert criterion(2, ok, f"paraboloid |1_P^| in {{0, p^((n-1)/2)}}, max deviation {worst:.1e} (< 1e-8)")


def _operator_fixtures():
    out = []
    for p, n in ((3, 1), (5, 2), (101, 1), (13, 2)):
        out.append(uniform_measure(Field(p), n))
    for p, n, idx in ((3, 1, 2), (7, 2, 11), (101, 1, 50), (13, 2, 0)):
        out.append(atom_measure(Field(p), n, idx))
    for p, n, a, b, seed in ((101, 1, 0.6, 0.4, 0), (101, 1, 0.6, 0.4, 1), (211, 1, 0.6, 0.4, 0),
                             (401, 1, 0.6, 0.4, 0), (401, 1, 0.8, 0.5, 2), (809, 1, 0.7, 0.3, 3),
                             (53, 1, 0.5, 0.5, 4), (31, 2, 1.2, 0.8, 0), (31, 2, 1.5, 1.0, 1),
                             (61, 2, 1.2, 0.8, 2), (13, 2, 1.0, 1.0, 3), (1601, 1, 0.6, 0.4, 5)):
        F = Field(p)
        out.append(combined_measure(cube_set(F, n, a, b), random_set(F, n, a, seed)))
    return out


def test_c03_closed_form_operator_norm(criterion):
    fixtures = _operator_fixtures()
    worst_22 = worst_inf = 0.0
    for mu in fixtures:
        est = rstar_2_2_exact(mu)
        worst_22 = max(worst_22, est.details["cross_check_rel_err"])
        worst_inf = max(worst_inf, abs(rstar_lower_iterate(mu, math.inf, restarts=2).value - 1.0))
    ok = len(fixtures) == 20 and worst_22 < 1e-6 and worst_inf < 1e-9
    assert criterion(3, ok, f"{len(fixtures)} fixtures: R*(2->2) vs power iteration {worst_22:.1e} (< 1e-6), "
                            f"|R*(2->inf) - 1| {worst_inf:.1e} (< 1e-9)")


def test_c04_bohr_box_inclusion(criterion):
    violations = cases = 0
    for p in (m for m in range(2, 258) if is_prime(m)):
        for n in (1, 2):
            for a, b in ((0.6, 0.4), (0.9, 0.9)):
                A = cube_set(Field(p), n, a, b)
                box = bohr_box_mask(A.field, n, A.meta["N"])
                violations += int(np.count_nonzero(box & ~bohr_set(A).mask))
                cases += 1
    ok = violations == 0
    assert criterion(4, ok, f"Bohr box inside A* for {cases} cube cases with p <= 257: {violations} violations")


def test_c05_random_salem(criterion):
    fails = {cfg: salem_failures(*cfg) for cfg in SALEM_CONFIGS}
    worst = max(fails.values())
    ok = worst <= 1
    assert criterion(5, ok, f"Salem bound C=4 over {len(SALEM_CONFIGS)} configs x 20 seeds: "
                            f"worst config has {worst} failures (<= 1)")


def test_c06_sharpness_scaling(criterion, sharpness_runs):
    results, elapsed = sharpness_runs
    slopes = [r.slope for r in results]
    good = sum(1 for s in slopes if s > 0 and abs(s - 0.1) <= 0.15)
    ok = good >= 2 and elapsed < 300
    assert criterion(6, ok, f"q=3 slopes {', '.join(f'{s:.4f}' for s in slopes)} (tau=0.1 +- 0.15, >0): "
                            f"{good}/3 seeds; {elapsed:.2f}s (< 300s)")


def test_c07_boundedness_scaling(criterion, sharpness_runs):
    below, _ = sharpness_runs
    above = run_boundedness(ExperimentConfig(mode="boundedness", q_list=[8.0]))
    slopes = {r.seed: r.slope for r in above}
    gaps = [r.slope - slopes[r.seed] for r in below]
    ok = all(-0.1 <= s <= 0.1 for s in slopes.values()) and all(g >= 0.1 for g in gaps)
    assert criterion(7, ok, f"q=8 slopes {', '.join(f'{s:.4f}' for s in slopes.values())} in [-0.1, 0.1]; "
                            f"q=3 minus q=8 gaps {', '.join(f'{g:.4f}' for g in gaps)} (>= 0.1)")


def test_c08_stein_tomas_machinery(criterion):
    F = Field(401)
    mu = combined_measure(cube_set(F, 1, 0.6, 0.4), random_set(F, 1, 0.6, 0))
    rep = spectral_report(mu)
    kb = kernel_bounds(mu, rep)
    k0 = abs(kernel_K(mu).values[0])
    q = math.ceil(critical_q(1, rep.alpha_eff, rep.beta_eff))
    stats = convolution_inequality_probe(mu, q, trials=100, seed=0, report=rep)
    bounded = all(r <= 1.05 * stats.ceiling for r in stats.ratios)
    ok = (k0 < 1e-12 and stats.max_plancherel_err < 1e-9 and kb.c_infty <= 1.01 and kb.c_two <= 1.01
          and bounded and len(stats.ratios) == 100)
    assert criterion(8, ok, f"p=401: |K(0)|={k0:.1e}, Plancherel {stats.max_plancherel_err:.1e}, "
                            f"c_infty={kb.c_infty:.4f}, c_two={kb.c_two:.4f}, q={q}: max ratio "
                            f"{stats.max_ratio:.4f} <= 1.05 x ceiling {stats.ceiling:.4f}")


def test_c09_exponent_algebra(criterion):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        alpha = float(rng.uniform(0.01, 0.999)) * n
        beta = float(rng.uniform(0.01, 1.0)) * alpha
        qc = critical_q(n, alpha, beta)
        worst = max(worst,
                    abs(necessary_q(2, n, alpha, beta) - qc) / qc,
                    abs(sharpness_tau(n, alpha, beta, qc)),
                    abs(corollary_q_bound(beta, n) - critical_q(n, beta / 2, beta)) / corollary_q_bound(beta, n))
    ok = worst < 1e-13
    assert criterion(9, ok, f"exponent identities over 100 draws, max deviation {worst:.1e} (< 1e-13)")


def test_c10_cli_determinism(criterion, tmp_path):
    runs = {
        "sharpness": ["sharpness"],
        "boundedness": ["boundedness", "--q", "8", "--primes", "211", "503", "1259", "2111"],
        "salem": ["salem", "--alpha", "0.7", "--primes", "101", "401", "--seed", "0", "1", "2", "3"],
    }
    identical = []
    for name, argv in runs.items():
        blobs = []
        for i in range(2):
            path = tmp_path / f"{name}{i}.csv"
            subprocess.run([sys.executable, "-m", "ffrestrict.cli", *argv, "--output", str(path)],
                           check=True, capture_output=True)
            blobs.append(path.read_bytes())
        identical.append(blobs[0] == blobs[1] and len(blobs[0]) > 0)
    ok = all(identical)
    assert criterion(10, ok, f"repeated CLI runs byte-identical: {dict(zip(runs, identical))}")
