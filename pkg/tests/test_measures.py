import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffrestrict.field import Field, balanced_coords, grid_coords, index_to_point, point_to_index
from ffrestrict.fourier import dft, lq_norm
from ffrestrict.measures import (
    GENERATOR, Measure, PointSet, atom_measure, bohr_box_count, bohr_box_mask, bohr_box_radius,
    bohr_set, combined_measure, cube_set, cube_side, normalized_measure, paraboloid_set,
    random_set, read_pointset, spectral_report, support_decay_check, uniform_measure,
    write_pointset,
)
from ffrestrict.restriction import extension

from conftest import S0

SALEM_C = 4.0
SALEM_SEEDS = range(20)
SALEM_CONFIGS = [(p, 1, a) for p in (101, 211, 401, 809, 1601) for a in (0.4, 0.7)] + \
                [(p, 2, a) for p in (31, 61) for a in (0.4, 0.7)]


def salem_failures(p, n, alpha, seeds=SALEM_SEEDS):
    F = Field(p)
    fails = 0
    for s in seeds:
        E = random_set(F, n, alpha, s)
        spec = np.abs(dft(E.indicator).values)
        bound = SALEM_C * math.sqrt(max(len(E), 1)) * math.sqrt(math.log(p ** n))
        fails += spec[1:].max() > bound
    return fails


# --- point sets and measures --------------------------------------------------------

def test_pointset_basics():
    S = PointSet(Field(5), 2, [7, 3, 3, 24])
    assert len(S) == 3 and list(S.members) == [3, 7, 24]
    assert 7 in S and 8 not in S
    assert S.indicator.values.sum() == 3
    assert set(np.unique(S.indicator.values.real)) == {0.0, 1.0}
    with pytest.raises(ValueError):
        PointSet(Field(5), 2, [25])


def test_measure_validation():
    with pytest.raises(ValueError):
        Measure(Field(3), 1, [0.5, -0.1, 0.6])
    with pytest.raises(ValueError):
        Measure(Field(3), 1, [0.5, 0.5])
    mu = Measure(Field(3), 1, [0.5, 0.0, 0.5])
    assert mu.support_size == 2 and mu.is_probability()


def test_uniform_measure():
    mu = uniform_measure(Field(3), 1)
    assert np.allclose(mu.density, 1 / 3)
    assert np.allclose(dft(mu.weights).values, [1, 0, 0], atol=1e-15)
    rep = spectral_report(mu)
    assert rep.alpha_eff == pytest.approx(1.0, abs=1e-12)
    assert rep.beta_eff == math.inf and rep.max_offzero_coeff == 0.0


@pytest.mark.parametrize("n", [1, 2])
def test_uniform_alpha_equals_n(n):
    assert spectral_report(uniform_measure(Field(7), n)).alpha_eff == pytest.approx(n, abs=1e-12)


def test_cube_side_examples():
    assert cube_side(101, 1, 0.6, 0.4) == 6
    A = cube_set(Field(101), 1, 0.6, 0.4)
    assert [x for (x,) in A.points()] == [1, 2, 3, 4, 5, 6]
    assert A.meta["N"] == 6
    for a in (0.3, 0.5, 0.8):
        assert cube_side(101, 1, a, a) == round(101 ** (a / 2))
    A2 = cube_set(Field(13), 2, 1.0, 1.0)
    assert A2.meta["N"] == 2 and len(A2) == 4
    assert sorted(A2.points()) == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_cube_set_rejects_bad_parameters():
    with pytest.raises(ValueError):
        cube_set(Field(101), 1, 0.4, 0.6)
    with pytest.raises(ValueError):
        cube_set(Field(101), 1, 1.0, 0.5)


def test_bohr_set_examples():
    F = Field(7)
    whole = PointSet(F, 1, np.arange(7))
    assert list(bohr_set(whole).members) == [0]
    single = PointSet(F, 1, [0])
    assert len(bohr_set(single)) == 7
    A = cube_set(Field(101), 1, 0.6, 0.4)
    star = bohr_set(A)
    assert {0, 1, 100} <= set(star.members.tolist())
    assert 0 in star


@pytest.mark.parametrize("p", [101, 211, 257])
@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("ab", [(0.6, 0.4), (0.9, 0.9)])
def test_bohr_box_inclusion_and_count(p, n, ab):
    A = cube_set(Field(p), n, *ab)
    N = A.meta["N"]
    star = bohr_set(A)
    box = bohr_box_mask(A.field, n, N)
    assert not np.any(box & ~star.mask)
    assert box.sum() == bohr_box_count(p, n, N)
    assert len(star) >= bohr_box_count(p, n, N)


def test_bohr_box_radius():
    assert bohr_box_radius(101, 1, 6) == 1
    assert bohr_box_radius(257, 2, 3) == 4
    assert bohr_box_count(101, 1, 6) == 3


def test_random_set_size_distribution():
    F = Field(101)
    sizes = [len(random_set(F, 1, 0.6, s)) for s in range(100)]
    assert all(4 <= k <= 64 for k in sizes)
    assert 12 < np.mean(sizes) < 20


def test_random_set_determinism_and_meta():
    F = Field(101)
    a, b = random_set(F, 1, 0.6, S0), random_set(F, 1, 0.6, S0)
    assert np.array_equal(a.members, b.members)
    assert a.meta["generator"] == GENERATOR
    assert a.meta["delta"] == pytest.approx(101 ** -0.4)
    assert a.meta["size"] == len(a) and a.meta["seed"] == S0


def test_random_set_full_alpha():
    assert len(random_set(Field(11), 1, 1.0, 3)) == 11


def test_random_set_retry_on_empty():
    # delta = 17^-1.9 is tiny, so most seeds draw nothing and retry.
    draws = [random_set(Field(17), 2, 0.1, s) for s in range(20)]
    for E in draws:
        assert len(E) >= 1
        assert E.meta["seed_used"] == E.meta["seed"] + E.meta["retries"]
    assert any(E.meta["retries"] > 0 for E in draws)


def test_combined_measure_examples(combined_101):
    F = Field(7)
    mu = combined_measure(PointSet(F, 1, [3]), PointSet(F, 1, []))
    assert np.array_equal(mu.density, atom_measure(F, 1, 3).density)

    mu = combined_101
    A, E = mu.parts["A"], mu.parts["E"]
    total = len(A) + len(E)
    assert mu.total_mass == pytest.approx(1.0, abs=1e-12)
    assert mu.density.max() <= 2 / total
    assert set(np.unique(mu.density)) <= {0.0, 1 / total, 2 / total}
    assert mu.support_size == len(np.union1d(A.members, E.members))
    assert mu.meta["AE_overlap"] == len(A.intersection(E))
    assert mu.meta["eta_warning"] == (mu.meta["AE_overlap"] > len(A) / 100)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32), st.floats(0.2, 0.95))
def test_combined_is_probability(seed, alpha):
    F = Field(53)
    A = cube_set(F, 1, alpha, alpha / 2)
    mu = combined_measure(A, random_set(F, 1, alpha, seed))
    assert abs(mu.total_mass - 1) < 1e-12
    assert mu.density.max() <= 2 / (mu.meta["A_size"] + mu.meta["E_size"])


def test_extension_lower_bound_on_bohr_set(combined_101, combined_401):
    for mu in (combined_101, combined_401):
        A, E = mu.parts["A"], mu.parts["E"]
        overlap = mu.meta["AE_overlap"]
        floor = (0.1 - overlap / len(A)) * len(A) / (len(A) + len(E))
        Tf = np.abs(extension(A.indicator, mu).values)
        assert np.all(Tf[bohr_set(A).members] >= floor - 1e-12)


def test_paraboloid_examples():
    P = paraboloid_set(Field(3), 2)
    assert sorted(P.points()) == [(0, 0), (1, 1), (2, 1)]
    spec = np.abs(dft(paraboloid_set(Field(5), 2).indicator).values)
    assert spec[1:].max() == pytest.approx(math.sqrt(5), abs=1e-12)
    with pytest.raises(ValueError):
        paraboloid_set(Field(5), 1)
    with pytest.raises(ValueError):
        paraboloid_set(Field(2), 2)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
@pytest.mark.parametrize("n", [2, 3])
def test_gauss_sum_exactness(p, n):
    P = paraboloid_set(Field(p), n)
    assert len(P) == p ** (n - 1)
    spec = np.abs(dft(P.indicator).values)[1:]
    target = p ** ((n - 1) / 2)
    assert np.all(np.minimum(spec, np.abs(spec - target)) < 1e-8)


def test_spectral_report_examples():
    F = Field(5)
    rep = spectral_report(atom_measure(F, 2, 0))
    assert rep.alpha_eff == 0 and rep.beta_eff == pytest.approx(0, abs=1e-12)
    rep = spectral_report(normalized_measure(paraboloid_set(F, 2)))
    assert rep.beta_eff == pytest.approx(1.0, abs=1e-12)
    assert rep.alpha_eff == pytest.approx(1.0, abs=1e-12)
    assert rep.mass_check == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        spectral_report(Measure(F, 1, np.zeros(5)))


def test_support_decay_check_examples():
    F = Field(7)
    for mu in (uniform_measure(F, 2), atom_measure(F, 2, 0), normalized_measure(paraboloid_set(F, 2))):
        chk = support_decay_check(spectral_report(mu), mu)
        assert not chk.violation
    mu = normalized_measure(paraboloid_set(F, 2))
    chk = support_decay_check(spectral_report(mu), mu)
    assert chk.support_ratio == pytest.approx(1.0)
    assert chk.density_ratio == pytest.approx(7 ** -0.5)


def test_support_decay_on_combined(combined_401):
    chk = support_decay_check(spectral_report(combined_401), combined_401)
    assert not chk.violation


@pytest.mark.parametrize("cfg", SALEM_CONFIGS, ids=lambda c: f"p{c[0]}n{c[1]}a{c[2]}")
def test_random_salem_bound(cfg):
    assert salem_failures(*cfg) <= 1


def test_structured_set_fails_salem_bound():
    A = cube_set(Field(1601), 1, 0.95, 0.1)
    spec = np.abs(dft(A.indicator).values)
    assert spec[1:].max() > SALEM_C * math.sqrt(len(A)) * math.sqrt(math.log(1601))


def test_pointset_io_round_trip(tmp_path):
    S = random_set(Field(31), 2, 1.2, 5)
    path = tmp_path / "s.txt"
    write_pointset(S, path)
    lines = path.read_text().splitlines()
    assert lines[0] == f"31 2 {len(S)}"
    T = read_pointset(path)
    assert np.array_equal(T.members, S.members) and T.dim == 2 and T.p == 31
    path.write_text("31 2 5\n1\n2\n")
    with pytest.raises(ValueError):
        read_pointset(path)


def test_balanced_box_matches_definition():
    p, n, N = 101, 2, 2
    mask = bohr_box_mask(Field(p), n, N)
    r = p / (10 * n * N)
    for idx in np.flatnonzero(mask)[:50]:
        pt = index_to_point(int(idx), Field(p), n)
        assert all(min(c, p - c) <= r for c in pt)
        assert point_to_index(pt, Field(p)) == idx
