"""Brute-force reference computations used to certify the fast paths.

Nothing here shares evaluation code with the production transforms: Legendre
values come from scipy, integrals from plain Gauss-Legendre products, Gaunt
coefficients from exact rational arithmetic.  Intended for small orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import sph_harm_y, spherical_jn, spherical_yn

from .grid import NodalScalarField, eval_nodal_field
from .specfun import DomainError


class OracleOverflowError(OverflowError):
    """An oracle intermediate left the representable range."""


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule on an interval."""

    panels: int
    nodes_per_panel: int
    tol: float = 1e-13

    def integrate(self, f, lo: float, hi: float) -> complex:
        x, w = np.polynomial.legendre.leggauss(self.nodes_per_panel)
        edges = np.linspace(lo, hi, self.panels + 1)
        h = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        t = (mid[:, None] + h[:, None] * x[None, :]).ravel()
        ww = (h[:, None] * w[None, :]).ravel()
        return complex(np.sum(ww * np.asarray(f(t))))

    def refined(self) -> "QuadratureRule":
        return QuadratureRule(2 * self.panels, self.nodes_per_panel, self.tol)


def integrate_converged(f, lo: float, hi: float, rule: QuadratureRule | None = None, max_doublings: int = 8) -> complex:
    """Integrate, doubling the panel count until two results agree to ``tol``."""
    rule = rule or QuadratureRule(4, 20)
    prev = rule.integrate(f, lo, hi)
    for _ in range(max_doublings):
        rule = rule.refined()
        cur = rule.integrate(f, lo, hi)
        if abs(cur - prev) <= rule.tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    return cur


def ylm(l: int, m: int, theta, phi):
    """Y_l^m without the Condon-Shortley phase, from scipy."""
    return (-1.0) ** m * sph_harm_y(l, m, theta, phi)


def quad_sph_coeff(field: NodalScalarField, l: int, m: int, points: int | None = None) -> complex:
    """``∫ u conj(Y_l^m) dΩ`` of the nodal interpolant by per-element
    Gauss-Legendre quadrature (``4(N + l)`` points per direction)."""
    if l > 25 and points is None:
        raise DomainError("quadrature oracle is meant for l <= 25")
    part = field.partition
    q = points or 4 * (part.N + l)
    x, w = np.polynomial.legendre.leggauss(q)
    total = 0j
    for el in part.elements:
        th, ph = el.map(x[:, None], x[None, :])
        th = np.broadcast_to(th, (q, q))
        ph = np.broadcast_to(ph, (q, q))
        u = eval_nodal_field(field, th.ravel(), ph.ravel()).reshape(q, q)
        y = np.conj(ylm(l, m, th, ph))
        jac = el.theta_half * el.phi_half * np.sin(th)
        total += np.sum(w[:, None] * w[None, :] * u * y * jac)
    return complex(total)


# ---------------------------------------------------------------------------
# Gaunt coefficients
# ---------------------------------------------------------------------------


def _three_j_parts(j1, j2, j3, m1, m2, m3):
    """3j symbol as ``(A, S)`` with value ``sqrt(A) * S``, both exact."""
    if m1 + m2 + m3 != 0:
        return Fraction(0), Fraction(0)
    if j3 < abs(j1 - j2) or j3 > j1 + j2:
        return Fraction(0), Fraction(0)
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return Fraction(0), Fraction(0)
    f = math.factorial
    tri = Fraction(f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3), f(j1 + j2 + j3 + 1))
    A = tri * (
        f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3)
    )
    tmin = max(0, j2 - j3 - m1, j1 - j3 + m2)
    tmax = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    S = Fraction(0)
    for t in range(tmin, tmax + 1):
        den = (
            f(t)
            * f(j3 - j2 + t + m1)
            * f(j3 - j1 + t - m2)
            * f(j1 + j2 - j3 - t)
            * f(j1 - t - m1)
            * f(j2 - t + m2)
        )
        S += Fraction(-1 if t % 2 else 1, den)
    if (j1 - j2 - m3) % 2:
        S = -S
    return A, S


def three_j(j1, j2, j3, m1, m2, m3) -> float:
    A, S = _three_j_parts(j1, j2, j3, m1, m2, m3)
    if S == 0:
        return 0.0
    return math.copysign(math.sqrt(float(A * S * S)), S)


def _eps(m: int) -> int:
    """Sign relating the module Y to the Condon-Shortley Y: ``(-1)^m``."""
    return -1 if m % 2 else 1


def gaunt(l: int, m: int, q: int, mu: int, n: int) -> float:
    """``∫ Y_l^m Y_q^μ conj(Y_n^{m+μ}) dΩ`` in the module convention.

    Exact up to the final square root; zero outside the selection rules.
    """
    if min(l, q, n) < 0:
        raise DomainError("degrees must be non-negative")
    M = m + mu
    if abs(m) > l or abs(mu) > q or abs(M) > n:
        return 0.0
    if (l + q + n) % 2 or n < abs(l - q) or n > l + q:
        return 0.0
    # Condon-Shortley: ∫ Y1 Y2 conj(Y3) = (-1)^M ∫ Y1 Y2 Y3^{-M}; the module
    # convention adds (-1)^(m + μ + M), so the net sign is (-1)^(m + μ)
    A0, S0 = _three_j_parts(l, q, n, 0, 0, 0)
    A1, S1 = _three_j_parts(l, q, n, m, mu, -M)
    if S0 == 0 or S1 == 0:
        return 0.0
    # square of the result is rational; take one root at the very end
    sq = Fraction((2 * l + 1) * (2 * q + 1) * (2 * n + 1)) * A0 * A1 * (S0 * S1) ** 2
    val = math.sqrt(float(sq) / (4.0 * math.pi))
    sign = (1 if S0 * S1 > 0 else -1) * _eps(m) * _eps(mu)
    return sign * val


# ---------------------------------------------------------------------------
# translation coefficients from the Gaunt series
# ---------------------------------------------------------------------------


def _hankel(n, z):
    return spherical_jn(n, z) + 1j * spherical_yn(n, z)


def separation_matrix_direct(offset, k: float, n: int, l: int, s: int, m: int) -> complex:
    """``S_{nl}^{sm}(b)`` with ``h_l(k|r_j + b|) Y_l^m = Σ S j_n(k r_j) Y_n^s(r̂_j)``."""
    if max(n, l) > 120:
        raise DomainError("direct separation matrix limited to n, l <= 120")
    b = np.asarray(offset, dtype=float)
    kb = k * float(np.linalg.norm(b))
    th = math.acos(max(-1.0, min(1.0, b[2] / np.linalg.norm(b))))
    ph = math.atan2(b[1], b[0])
    mu = s - m
    total = 0j
    for q in range(abs(n - l), n + l + 1):
        g = gaunt(l, m, q, mu, n)
        if g == 0.0:
            continue
        h = _hankel(q, kb)
        if abs(h) > 1e290:
            raise OracleOverflowError(f"|h_{q}({kb})| exceeds the oracle range")
        total += (1j) ** q * h * np.conj(ylm(q, mu, th, ph)) * g
    return complex(4.0 * math.pi * (1j) ** (n - l) * total)


def normalized_translation_direct(offset, k: float, a_i: float, a_j: float, n: int, l: int, s: int, m: int) -> complex:
    """``Ψ = S j_n(k a_j) / h_l(k a_i)``."""
    S = separation_matrix_direct(offset, k, n, l, s, m)
    return complex(S * spherical_jn(n, k * a_j) / _hankel(l, k * a_i))


# ---------------------------------------------------------------------------
# trigonometric forms by discrete Fourier analysis
# ---------------------------------------------------------------------------


def trig_form_dft(l: int, m: int, samples: int | None = None) -> np.ndarray:
    """Coefficients of ``θ -> P̂_l^m(cos θ)`` over ``cos(fθ)`` (m even) or
    ``sin(fθ)`` (m odd), indexed by frequency ``f = 0..l``.

    Uses uniform samples of the function extended to ``[0, 2π)`` by
    ``f(2π - θ) = (-1)^m f(θ)``.
    """
    samples = samples or max(8, 4 * l + 4)
    if samples < 4 * l:
        raise DomainError("need at least 4l samples")
    t = 2.0 * math.pi * np.arange(samples) / samples
    tt = np.where(t <= math.pi, t, 2.0 * math.pi - t)
    sign = np.where(t <= math.pi, 1.0, (-1.0) ** m)
    vals = sign * np.real(ylm(l, m, tt, 0.0))
    F = np.fft.rfft(vals) / samples
    out = np.zeros(l + 1)
    if m % 2 == 0:
        out[0] = F[0].real
        out[1:] = 2.0 * F[1 : l + 1].real
    else:
        out[1:] = -2.0 * F[1 : l + 1].imag
    return out
