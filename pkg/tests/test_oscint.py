import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import eval_legendre, sph_harm_y

from sphelem.oscint import cs_integrals, legendre_fourier, p_integral, q_integral
from sphelem.specfun import trig_form


def quad_re(f):
    return quad(f, -1, 1, limit=400, epsabs=1e-14, epsrel=1e-13)[0]


@given(st.integers(0, 25), st.floats(-30.0, 30.0), st.floats(-3.0, 3.0))
def test_cs_integrals(n, lam, rho):
    C, S = cs_integrals(n, lam, rho)
    assert C == pytest.approx(quad_re(lambda x: eval_legendre(n, x) * math.cos(lam * x + rho)), abs=1e-12)
    assert S == pytest.approx(quad_re(lambda x: eval_legendre(n, x) * math.sin(lam * x + rho)), abs=1e-12)


def test_tiny_frequency_finite():
    C, S = cs_integrals(0, 7e-307, 0.0)
    assert C == pytest.approx(2.0) and S == pytest.approx(0.0, abs=1e-300)


def test_legendre_fourier_zero_frequency():
    assert legendre_fourier(0, 0.0, 0.0) == pytest.approx(2.0)
    assert legendre_fourier(3, 0.0, 0.5) == 0
    C, S = cs_integrals(2, 1.3, 0.4)
    assert legendre_fourier(2, 1.3, 0.4) == pytest.approx(C - 1j * S, abs=1e-14)


def _phat(l, m, th):
    return (-1) ** m * sph_harm_y(l, m, th, 0.0).real


@given(st.integers(0, 15), st.data(), st.integers(0, 12), st.floats(0.05, 1.5))
def test_p_and_q_integrals(l, data, n, lam):
    # element θ-intervals λx + ρ stay inside [0, π]
    m = data.draw(st.integers(0, l))
    rho = data.draw(st.floats(lam, math.pi - lam))
    tf = trig_form(l, m)
    P = quad_re(lambda x: eval_legendre(n, x) * _phat(l, m, lam * x + rho))
    Q = quad_re(lambda x: eval_legendre(n, x) * _phat(l, m, lam * x + rho) * math.sin(lam * x + rho))
    assert p_integral(tf, n, lam, rho) == pytest.approx(P, abs=1e-12)
    assert q_integral(tf, n, lam, rho) == pytest.approx(Q, abs=1e-12)
