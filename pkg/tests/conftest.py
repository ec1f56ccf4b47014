import cmath
import math

import numpy as np
import pytest

from ffrestrict.field import Field, grid_coords, grid_strides
from ffrestrict.fourier import GridFn, convolve, dft, idft, lq_norm
from ffrestrict.measures import combined_measure, cube_set, random_set

# Seed used for every "fixed seed s0" fixture.
S0 = 0


def brute_dft(values, p, n, sign=-1):
    """Literal double sum with cmath, independent of the package kernels."""
    coords = [tuple(int(c) for c in row) for row in grid_coords(p, n)]
    out = []
    for xi in coords:
        acc = 0j
        for x, v in zip(coords, values):
            t = sum(a * b for a, b in zip(x, xi)) % p
            acc += v * cmath.exp(sign * 2j * math.pi * t / p)
        out.append(acc)
    return np.array(out)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    return 0.0 if scale == 0 else float(np.linalg.norm(a - b) / scale)


def literal_convolution_at(f, g, p, n, xs):
    """(f * g)(x) = sum_y f(x - y) g(y) evaluated only at the indices xs."""
    coords = grid_coords(p, n)
    strides = grid_strides(p, n)
    out = []
    for x in xs:
        diff = ((coords[x] - coords) % p) @ strides
        out.append(np.sum(f[diff] * g))
    return np.array(out)


# Above this size the literal O(p^2n) convolution is too slow to run per function;
# the fast route is used and sampled against the literal sum instead.
LITERAL_CONVOLVE_MAX = 3000
CONVOLVE_SAMPLES = 16


def fourier_identity_errors(p, n, count=100, seed=0):
    """Worst relative errors of Plancherel, inversion, convolution and symmetry."""
    rng = np.random.default_rng(seed)
    F = Field(p)
    size = p ** n
    worst = dict.fromkeys(("plancherel", "inversion", "convolution", "convolution_sampled", "symmetry"), 0.0)
    literal = size <= LITERAL_CONVOLVE_MAX
    for _ in range(count):
        f, g = GridFn.random(F, n, rng), GridFn.random(F, n, rng)
        fh, gh = dft(f), dft(g)
        e_f = lq_norm(f, 2) ** 2
        worst["plancherel"] = max(worst["plancherel"], abs(lq_norm(fh, 2) ** 2 - size * e_f) / (size * e_f))
        worst["inversion"] = max(worst["inversion"], rel_err(idft(fh).values, size * f.values),
                                 rel_err(dft(idft(f)).values, size * f.values))
        fg = convolve(f, g, "direct" if literal else "rader")
        if not literal:
            xs = rng.choice(size, CONVOLVE_SAMPLES, replace=False)
            ref = literal_convolution_at(f.values, g.values, p, n, xs)
            worst["convolution_sampled"] = max(worst["convolution_sampled"], rel_err(fg.values[xs], ref))
        worst["convolution"] = max(worst["convolution"], rel_err(dft(fg).values, fh.values * gh.values))
        s1, s2 = np.sum(fh.values * g.values), np.sum(f.values * gh.values)
        worst["symmetry"] = max(worst["symmetry"], abs(s1 - s2) / max(abs(s1), abs(s2)))
    return worst


@pytest.fixture(scope="session")
def combined_101():
    F = Field(101)
    return combined_measure(cube_set(F, 1, 0.6, 0.4), random_set(F, 1, 0.6, S0))


@pytest.fixture(scope="session")
def combined_401():
    F = Field(401)
    return combined_measure(cube_set(F, 1, 0.6, 0.4), random_set(F, 1, 0.6, S0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance report -------------------------------------------------------------------

ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion; printed in the terminal summary."""
    def record(number, ok, detail):
        ACCEPTANCE_LINES[number] = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
