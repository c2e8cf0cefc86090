import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphelem import oracle
from sphelem.fields import on_sphere, plane_wave
from sphelem.grid import build_uniform_partition, sample_scalar
from sphelem.multiscatter import (
    DimensionError,
    DomainError,
    ScattererSet,
    assemble_and_solve,
    boundary_residual,
    coeffs_to_flat,
    eval_total_field,
    flat_to_coeffs,
    lm_index,
    solve_from_coeffs,
    sphere_points,
    translation_coefficients,
    translation_table,
)
from sphelem.radial import make_context, ratio_table
from sphelem.scatter import eval_acoustic, solve_acoustic_single
from sphelem.specfun import sph_harm


def test_lm_index_order():
    idx = [lm_index(l, m) for l in range(4) for m in range(-l, l + 1)]
    assert idx == list(range(16))


def test_scatterer_set_validation():
    with pytest.raises(DomainError):
        ScattererSet(np.array([[0, 0, 0], [0.4, 0, 0]]), np.array([0.25, 0.25]))
    with pytest.raises(DimensionError):
        ScattererSet(np.array([[0, 0, 0]]), np.array([0.25, 0.25]))
    with pytest.raises(DomainError):
        ScattererSet(np.array([[0, 0, 0]]), np.array([-1.0]))
    s = ScattererSet(np.array([[0, 0, 0], [1.0, 2.0, 0]]), np.array([0.2, 0.3]))
    np.testing.assert_array_equal(s.offset(0, 1), -s.offset(1, 0))
    with pytest.raises(DomainError):
        translation_table(s, (1, 1), 2.0, 3)


def test_flat_roundtrip():
    rng = np.random.default_rng(0)
    v = rng.normal(size=25) + 1j * rng.normal(size=25)
    np.testing.assert_array_equal(coeffs_to_flat(flat_to_coeffs(v, 4)), v)


def _geometry(seed):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=3)
    b *= rng.uniform(0.4, 1.5) / np.linalg.norm(b)
    return b, rng.uniform(1.0, 15.0), rng.uniform(0.03, 0.15), rng.uniform(0.03, 0.15)


@settings(max_examples=6)
@given(st.integers(0, 10**6))
def test_matches_gaunt_series(seed):
    b, k, ai, aj = _geometry(seed)
    L = 3
    T = translation_coefficients(b, k, ai, aj, L)
    scale = np.abs(T).max()
    for n in range(L + 1):
        for l in range(L + 1):
            for s in range(-n, n + 1):
                for m in range(-l, l + 1):
                    ref = oracle.normalized_translation_direct(b, k, ai, aj, n, l, s, m)
                    got = T[lm_index(n, s), lm_index(l, m)]
                    assert abs(got - ref) <= 1e-10 * max(abs(ref), 1e-6 * scale)


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_axial_translation_diagonal_in_order(sign):
    L = 12
    T = translation_coefficients([0, 0, sign * 0.8], 9.0, 0.2, 0.2, L)
    scale = np.abs(T).max()
    for n in range(L + 1):
        for s in range(-n, n + 1):
            for l in range(L + 1):
                for m in range(-l, l + 1):
                    if s != m:
                        assert abs(T[lm_index(n, s), lm_index(l, m)]) <= 1e-13 * scale


@pytest.mark.parametrize("seed", range(10))
def test_addition_theorem(seed):
    rng = np.random.default_rng(100 + seed)
    a = rng.uniform(0.1, 0.3)
    d = rng.normal(size=3)
    d *= rng.uniform(2.2 * a + 0.1, 1.5) / np.linalg.norm(d)
    k = rng.uniform(2.0, 20.0)
    L = 30
    sset = ScattererSet(np.array([[0.0, 0, 0], d]), np.array([a, a]))
    T = translation_table(sset, (0, 1), k, L)
    pts, th, ph = sphere_points(sset, 1, 40, seed)
    r0, t0, p0 = sset.local(0, pts)
    R = ratio_table(make_context(k, a, L), r0, L)
    Y = np.array([sph_harm(n, s, th, ph) for n in range(L + 1) for s in range(-n, n + 1)])
    for l in range(11):
        for m in range(-l, l + 1):
            direct = R[l] * sph_harm(l, m, t0, p0)
            series = T.data[:, lm_index(l, m)] @ Y
            # ψ_l^m has unit scale on its own sphere
            assert np.max(np.abs(direct - series)) <= 1e-10


def _two(k=12.0):
    return ScattererSet(np.array([[-0.6, 0.1, 0.0], [0.5, -0.2, 0.3]]), np.array([0.25, 0.2]))


def _boundary(sset, k, part, wave=None):
    wave = wave or plane_wave(k, [0.0, 0.0, 1.0])
    return [sample_scalar(on_sphere(wave, sset.radii[i], sset.centers[i]), part) for i in range(sset.M)]


def test_single_scatterer_reduces_to_single_solver():
    k, a, L = 10.0, 0.3, 24
    sset = ScattererSet(np.array([[0.2, -0.1, 0.4]]), np.array([a]))
    part = build_uniform_partition(3, 4, 24)
    bnd = _boundary(sset, k, part)
    sol = assemble_and_solve(sset, k, L, bnd)
    np.testing.assert_array_equal(sol.A, sol.G)
    single = solve_acoustic_single(bnd[0], k, L, a)
    rng = np.random.default_rng(5)
    d = rng.normal(size=(30, 3))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    r = rng.uniform(a, 3.0, 30)
    pts = sset.centers[0] + r[:, None] * d
    rr, th, ph = sset.local(0, pts)
    np.testing.assert_allclose(eval_total_field(sol, pts), eval_acoustic(single, rr, th, ph), atol=1e-12)
    assert boundary_residual(sol, bnd).max() <= 1e-12


def test_label_swap_invariance():
    k, L = 12.0, 20
    s = _two()
    swapped = ScattererSet(s.centers[::-1].copy(), s.radii[::-1].copy())
    part = build_uniform_partition(3, 4, 20)
    s1 = assemble_and_solve(s, k, L, _boundary(s, k, part))
    s2 = assemble_and_solve(swapped, k, L, _boundary(swapped, k, part))
    pts = np.array([[0.0, 1.0, 0.5], [2.0, -1.0, 0.0], [-0.1, 0.0, -0.9]])
    u1, u2 = eval_total_field(s1, pts), eval_total_field(s2, pts)
    assert np.max(np.abs(u1 - u2)) <= 1e-12 * np.max(np.abs(u1))
    assert s1.system_residual <= 1e-12


def test_residual_decreases_with_cutoff():
    k = 20.0
    s = _two()
    part = build_uniform_partition(3, 4, 30)
    bnd = _boundary(s, k, part)
    res = [boundary_residual(assemble_and_solve(s, k, L, bnd), bnd, 200).max() for L in (4, 8, 12, 16, 20)]
    assert res[0] > 1e-2
    assert all(b < a for a, b in zip(res, res[1:]))


def test_dimension_checks_and_interior_points():
    s = _two()
    part = build_uniform_partition(2, 2, 4)
    with pytest.raises(DimensionError):
        assemble_and_solve(s, 3.0, 4, _boundary(s, 3.0, part)[:1])
    with pytest.raises(DimensionError):
        solve_from_coeffs(s, 3.0, 4, np.zeros((2, 10)))
    sol = solve_from_coeffs(s, 3.0, 4, np.zeros((2, 25)))
    assert np.all(eval_total_field(sol, np.array([[3.0, 0, 0]])) == 0)
    with pytest.raises(DomainError):
        eval_total_field(sol, s.centers[:1])
