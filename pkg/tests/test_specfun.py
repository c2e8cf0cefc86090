import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import sph_harm_y, spherical_jn, spherical_yn

from sphelem import oracle
from sphelem.specfun import (
    DomainError,
    assoc_legendre_over_sin_weights,
    dtheta_assoc_legendre_weights,
    hankel_log,
    hankel_log_derivative,
    hankel_ratio_seq,
    legendre_table,
    legendre_vandermonde,
    lgl_basis_table,
    normalized_assoc_legendre,
    sph_bessel_j,
    sph_bessel_j_log,
    sph_bessel_j_ratio_seq,
    sph_bessel_j_table,
    sph_harm,
    trig_form,
    trig_table,
)


def h1(n, z):
    return spherical_jn(n, z) + 1j * spherical_yn(n, z)


def p_ref(l, m, x):
    # module convention omits the Condon-Shortley phase
    return (-1) ** m * sph_harm_y(l, m, np.arccos(x), 0.0).real


@given(st.integers(0, 60), st.data(), st.floats(-1.0, 1.0))
def test_assoc_legendre_matches_scipy(l, data, x):
    m = data.draw(st.integers(0, l))
    assert normalized_assoc_legendre(l, m, x) == pytest.approx(p_ref(l, m, x), abs=1e-12)


def test_assoc_legendre_low_orders():
    assert normalized_assoc_legendre(0, 0, 0.3) == pytest.approx(0.5 / math.sqrt(math.pi))
    assert normalized_assoc_legendre(1, 1, 0.0) == pytest.approx(math.sqrt(3 / (8 * math.pi)))
    assert normalized_assoc_legendre(1, 0, 1.0) == pytest.approx(math.sqrt(3 / (4 * math.pi)))


def test_assoc_legendre_domain():
    with pytest.raises(DomainError):
        normalized_assoc_legendre(2, 3, 0.1)
    with pytest.raises(DomainError):
        normalized_assoc_legendre(2, 1, 1.5)


def test_legendre_table_consistent():
    x = np.linspace(-1, 1, 7)
    P = legendre_table(20, x)
    for l in (0, 5, 20):
        for m in range(l + 1):
            np.testing.assert_allclose(P[l, m], normalized_assoc_legendre(l, m, x), atol=1e-14)


def test_legendre_table_high_degree_finite():
    x = np.cos(np.linspace(1e-3, np.pi - 1e-3, 11))
    P = legendre_table(400, x)
    assert np.all(np.isfinite(P))
    np.testing.assert_allclose(P[400, 200], p_ref(400, 200, x), atol=1e-10)


@given(st.integers(0, 30), st.data(), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_sph_harm_conjugation(l, data, th, ph):
    m = data.draw(st.integers(0, l))
    y = sph_harm(l, m, th, ph)
    assert sph_harm(l, -m, th, ph) == pytest.approx((-1) ** m * np.conj(y), abs=1e-13)
    assert y == pytest.approx(oracle.ylm(l, m, th, ph), abs=1e-12)


@given(st.integers(0, 40), st.data())
def test_trig_form_matches_dft(l, data):
    m = data.draw(st.integers(0, l))
    tf = trig_form(l, m)
    ref = oracle.trig_form_dft(l, m)
    got = np.zeros(l + 1)
    got[tf.freqs] = tf.coeffs
    np.testing.assert_allclose(got, ref, atol=1e-13)


def test_trig_form_values():
    assert trig_form(0, 0).coeffs[0] == pytest.approx(0.5 / math.sqrt(math.pi))
    tf = trig_form(1, 1)
    assert tf.kind == "sin"
    assert tf.coeffs[0] == pytest.approx(math.sqrt(3 / (8 * math.pi)), abs=1e-8)


def test_trig_form_synthesis():
    th = np.linspace(0, math.pi, 13)
    for l, m in ((7, 0), (8, 3), (25, 24), (60, 31)):
        np.testing.assert_allclose(trig_form(l, m)(th), p_ref(l, m, np.cos(th)), atol=1e-12)


def test_trig_table_rows():
    rows = trig_table(6)
    assert len(rows) == 7
    np.testing.assert_allclose(rows[5][2], trig_form(5, 2).coeffs, atol=1e-15)


@given(st.integers(1, 40), st.data(), st.floats(0.05, math.pi - 0.05))
def test_dtheta_weights(l, data, th):
    m = data.draw(st.integers(0, l))
    lhs = sum(w * p_ref(l, o, math.cos(th)) for o, w in dtheta_assoc_legendre_weights(l, m))
    h = 1e-5
    fd = (p_ref(l, m, math.cos(th + h)) - p_ref(l, m, math.cos(th - h))) / (2 * h)
    assert lhs == pytest.approx(fd, abs=1e-6 * max(1.0, l))


@given(st.integers(1, 40), st.data(), st.floats(0.05, math.pi - 0.05))
def test_over_sin_weights(l, data, th):
    m = data.draw(st.integers(1, l))
    lhs = sum(w * p_ref(l + 1, o, math.cos(th)) for o, w in assoc_legendre_over_sin_weights(l, m))
    assert lhs == pytest.approx(p_ref(l, m, math.cos(th)) / math.sin(th), abs=1e-11)


def test_weight_domains():
    with pytest.raises(DomainError):
        dtheta_assoc_legendre_weights(0, 0)
    with pytest.raises(DomainError):
        assoc_legendre_over_sin_weights(3, 0)


@given(st.floats(0.1, 300.0))
def test_bessel_table_matches_scipy(z):
    n = np.arange(121)
    j = sph_bessel_j_table(120, z)
    ref = spherical_jn(n, z)
    big = np.abs(ref) > 1e-250
    np.testing.assert_allclose(j[big], ref[big], rtol=1e-10, atol=1e-15 * np.abs(ref).max())


def test_bessel_zero_argument():
    assert sph_bessel_j(0, 0.0) == 1.0
    assert sph_bessel_j(3, 0.0) == 0.0
    with pytest.raises(DomainError):
        sph_bessel_j(-1, 1.0)


def test_bessel_tiny_values_no_underflow():
    logs, signs = sph_bessel_j_log(300, 5.0)
    assert np.all(np.isfinite(logs))
    # j_300(5) is far below the double range; the log stays accurate
    assert logs[300] < -700
    assert logs[40] == pytest.approx(math.log(abs(spherical_jn(40, 5.0))), rel=1e-12)


@given(st.floats(0.2, 200.0))
def test_bessel_ratio(z):
    a = sph_bessel_j_ratio_seq(30, z)
    n = np.arange(31)
    jn, jn1 = spherical_jn(n, z), spherical_jn(n + 1, z)
    # near a zero of either factor the ratio is set by the rounding of z
    ok = (np.abs(jn1) > 1e-8 * np.abs(jn)) & (np.abs(jn) > 1e-8 * np.abs(jn1)) & (np.abs(jn) > 1e-200)
    np.testing.assert_allclose(a[ok], (jn / jn1)[ok], rtol=1e-8)


def test_bessel_ratio_domain():
    with pytest.raises(DomainError):
        sph_bessel_j_ratio_seq(3, 0.0)


@given(st.floats(0.05, 200.0))
def test_hankel_log_derivative(z):
    rho = hankel_log_derivative(40, z)
    n = np.arange(41)
    ref = (spherical_jn(n, z, True) + 1j * spherical_yn(n, z, True)) / h1(n, z)
    ok = np.abs(h1(n, z)) < 1e250
    np.testing.assert_allclose(rho[ok], ref[ok], rtol=1e-11)


@given(st.floats(0.05, 100.0))
def test_hankel_ratio_and_log(z):
    n = np.arange(31)
    g = hankel_ratio_seq(29, z)
    ok = np.abs(h1(n[1:], z)) < 1e250
    np.testing.assert_allclose(g[ok], (h1(n[:-1], z) / h1(n[1:], z))[ok], rtol=1e-11)
    lg = hankel_log(30, z)
    ok = np.abs(h1(n, z)) < 1e250
    np.testing.assert_allclose(np.exp(lg[ok]), h1(n, z)[ok], rtol=1e-10)


def test_zgamma_identity():
    z = 7.3
    rho = hankel_log_derivative(20, z)
    g = hankel_ratio_seq(20, z)
    m = np.arange(1, 21)
    np.testing.assert_allclose(z * rho[1:] + (m + 1), z * g[:-1], rtol=1e-12)


def test_hankel_domain():
    with pytest.raises(DomainError):
        hankel_log_derivative(3, -1.0)


@pytest.mark.parametrize("N", [1, 2, 5, 16, 50])
def test_lgl_table(N):
    t = lgl_basis_table(N)
    assert t.nodes[0] == -1.0 and t.nodes[-1] == 1.0
    assert t.weights.sum() == pytest.approx(2.0)
    # quadrature exact to degree 2N - 1
    assert t.weights @ t.nodes ** (2 * N - 2) == pytest.approx(2.0 / (2 * N - 1))
    # Lagrange basis reproduces the identity at the nodes
    V = legendre_vandermonde(N, t.nodes)
    np.testing.assert_allclose(t.v @ V, np.eye(N + 1), atol=1e-11)
