import cmath

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.special import spherical_jn, spherical_yn

from sphelem.radial import (
    log_ratio_table,
    make_context,
    outgoing_ratio,
    radial_tables,
    ratio_table,
    z_ratios,
)
from sphelem.specfun import DomainError, hankel_log, hankel_log_derivative


def h1(n, z):
    return spherical_jn(n, z) + 1j * spherical_yn(n, z)


def h1d(n, z):
    return spherical_jn(n, z, True) + 1j * spherical_yn(n, z, True)


def test_unit_at_surface():
    ctx = make_context(7.0, 0.4, 30)
    np.testing.assert_allclose(ratio_table(ctx, 0.4), 1.0, atol=0)
    assert outgoing_ratio(ctx, 12, 0.4) == 1.0


def test_order_zero_closed_form():
    ctx = make_context(1.0, 1.0, 0)
    assert outgoing_ratio(ctx, 0, 2.0) == pytest.approx(0.5 * cmath.exp(1j), abs=1e-14)


@given(st.floats(0.5, 50.0), st.floats(0.1, 2.0), st.floats(1.0, 30.0))
def test_matches_hankel_quotient(k, b, ratio):
    r = b * ratio
    # scipy's y_n loses relative accuracy at large arguments
    assume(k * r <= 400.0)
    ctx = make_context(k, b, 20)
    R = ratio_table(ctx, r)
    n = np.arange(21)
    ref = h1(n, k * r) / h1(n, k * b)
    ok = np.abs(h1(n, k * r)) < 1e250
    np.testing.assert_allclose(R[ok], ref[ok], rtol=1e-12)


def test_large_argument_against_mpmath():
    k, b, r = 41.0, 2.0, 24.0
    R = ratio_table(make_context(k, b, 20), r)
    mpmath.mp.dps = 40

    def H(l, z):
        return mpmath.sqrt(mpmath.pi / (2 * z)) * (mpmath.besselj(l + 0.5, z) + 1j * mpmath.bessely(l + 0.5, z))

    for l in (0, 7, 20):
        ref = complex(H(l, k * r) / H(l, k * b))
        assert abs(R[l] - ref) <= 1e-12 * abs(ref)


def test_z_ratios_direct():
    k, b, r, l = 25.0, 0.25, 0.6, 8
    Z = lambda z: h1(l, z) + z * h1d(l, z)
    Rt, Rb = z_ratios(make_context(k, b, l), l, r)
    assert Rt == pytest.approx(Z(k * r) / Z(k * b), rel=1e-11)
    assert Rb == pytest.approx(h1(l, k * r) / Z(k * b), rel=1e-11)


def test_z_ratios_surface():
    ctx = make_context(1.0, 1.0, 3)
    Rt, Rb = z_ratios(ctx, 0, 1.0)
    assert Rt == pytest.approx(1.0) and Rb == pytest.approx(-1j)


def test_modulus_bounded_and_monotone():
    b = 0.3
    for k in (0.5, 5.0, 40.0):
        ctx = make_context(k, b, 300)
        r = b * np.geomspace(1.0, 100.0, 60)
        A = np.abs(ratio_table(ctx, r))
        assert np.all(A <= 1.0 + 1e-14)
        assert np.all(np.diff(A, axis=1) <= 1e-14)


def test_no_overflow_far_out():
    ctx = make_context(40.0, 0.25, 400)
    R, Rt, Rb, rho = radial_tables(ctx, np.array([0.25, 2.5, 250.0]))
    for a in (R, Rt, Rb, rho):
        assert np.all(np.isfinite(a))


def test_ode_residual():
    k, b, l, r, h = 10.0, 1.0, 6, 1.7, 1e-6
    ctx = make_context(k, b, l)
    d = (outgoing_ratio(ctx, l, r + h) - outgoing_ratio(ctx, l, r - h)) / (2 * h)
    R = outgoing_ratio(ctx, l, r)
    rho = hankel_log_derivative(l, k * r)[l]
    assert abs(d - k * rho * R) <= 1e-6 * abs(k * rho * R)


@pytest.mark.parametrize("z", [0.5, 1.0, 5.0, 10.0, 50.0, 100.0, 500.0])
def test_rho_bounds(z):
    rho = hankel_log_derivative(500, z)
    l = np.arange(1, 501)
    re, im = rho[1:].real, rho[1:].imag
    assert np.all(re >= -(l + 1) / z * (1 + 1e-13))
    assert np.all(re <= -1 / z * (1 - 1e-13))
    assert np.all(im >= 0) and np.all(im <= 1 + 1e-15)
    # Wronskian: Im ρ_l = 1/(z²|h_l|²), positive but below the double range
    # once |h_l| passes about 1e154
    ref = np.exp(-2.0 * (hankel_log(500, z)[1:].real + np.log(z)))
    ok = ref > 1e-290
    np.testing.assert_allclose(im[ok], ref[ok], rtol=1e-11)
    assert np.all(im[ok] > 0)
    assert rho[0] == pytest.approx(-1 / z + 1j)


def test_log_table_shape_and_domain():
    ctx = make_context(3.0, 1.0, 5)
    assert log_ratio_table(ctx, np.ones((2, 3)) * 1.5).shape == (6, 2, 3)
    with pytest.raises(DomainError):
        ratio_table(ctx, 0.5)
    with pytest.raises(DomainError):
        make_context(-1.0, 1.0, 3)
