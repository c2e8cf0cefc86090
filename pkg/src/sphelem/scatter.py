"""Exterior solvers for a single sphere ``r = b``.

Acoustic (sound-soft) field::

    u(r, θ, φ) = Σ Û_l^m R_l(r) Y_l^m

Electromagnetic (perfect conductor) field, with tangential boundary data
``Σ V_l^m Ψ_l^m + W_l^m Φ_l^m`` and ``ϖ_l = l(l+1)``::

    E = Σ (b/r) ϖ V R̆ Y + (b/r) V R̃ Ψ + W R Φ
    H = Σ ϖ W R / (ikr) Y + W R (1 + kr ρ_l(kr)) / (ikr) Ψ - ikb V R̆ Φ

Only the ratios of the radial module appear, so no Hankel function is
evaluated on its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import NodalScalarField, NodalVectorField
from .radial import RadialContext, make_context, radial_tables, ratio_table
from .specfun import DomainError, hankel_log, hankel_log_derivative
from .sphtrans import SphCoeffs, sph_forward, sph_synthesize
from .vshtrans import VshCoeffs, vsh_forward, vsh_synthesize


class SingularSystemError(ArithmeticError):
    """The discrete radial operator is numerically rank deficient."""


def _points(r, theta, phi):
    r, theta, phi = np.broadcast_arrays(
        np.asarray(r, float), np.asarray(theta, float), np.asarray(phi, float)
    )
    return r, theta, phi


# ---------------------------------------------------------------------------
# acoustic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AcousticSolution:
    k: float
    b: float
    coeffs: SphCoeffs
    radial: RadialContext

    @property
    def L(self) -> int:
        return self.coeffs.L


def solve_acoustic_single(boundary: NodalScalarField, k: float, L: int, b: float) -> AcousticSolution:
    """Outgoing field whose trace on ``r = b`` is the nodal boundary data."""
    coeffs = sph_forward(boundary, L)
    return AcousticSolution(float(k), float(b), coeffs, make_context(k, b, L))


def acoustic_from_coeffs(coeffs: SphCoeffs, k: float, b: float) -> AcousticSolution:
    """Solution object for given boundary coefficients."""
    return AcousticSolution(float(k), float(b), coeffs, make_context(k, b, coeffs.L))


def eval_acoustic(sol: AcousticSolution, r, theta, phi) -> np.ndarray:
    """``u_L`` at points with ``r >= b`` (arrays broadcast together)."""
    r, theta, phi = _points(r, theta, phi)
    if np.any(r < sol.b):
        raise DomainError("evaluation radius below the sphere")
    R = ratio_table(sol.radial, r, sol.L)
    return sph_synthesize(sol.coeffs, theta, phi, radial=R)


def acoustic_far_field(sol: AcousticSolution, theta, phi) -> np.ndarray:
    """Far-field pattern ``lim r e^{-ikr} u``; experimental.

    Uses ``h_l(kr) ~ (-i)^{l+1} e^{ikr}/(kr)``, so each mode carries
    ``(-i)^{l+1} / (k h_l(kb))``, which underflows to zero at high degree.
    """
    l = np.arange(sol.L + 1)
    with np.errstate(under="ignore"):
        inv_h = np.exp(-hankel_log(sol.L, sol.k * sol.b))
    fac = (-1j) ** (l + 1) * inv_h / sol.k
    c = SphCoeffs(sol.L, sol.coeffs.a * fac[:, None])
    return sph_synthesize(c, theta, phi)


def dtn_apply(coeffs: SphCoeffs, k: float, b: float) -> SphCoeffs:
    """Coefficients of the DtN image: mode ``l`` times ``-k ρ_l(kb)``."""
    mult = -k * hankel_log_derivative(coeffs.L, k * b)
    return SphCoeffs(coeffs.L, coeffs.a * mult[:, None])


# ---------------------------------------------------------------------------
# electromagnetic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmSolution:
    k: float
    b: float
    V: SphCoeffs
    W: SphCoeffs
    radial: RadialContext

    @property
    def L(self) -> int:
        return self.V.L


def em_tangential_coeffs(coeffs: VshCoeffs) -> tuple[SphCoeffs, SphCoeffs]:
    """``(V, W)`` with the tangential trace equal to ``Σ V Ψ + W Φ``.

    The VSH transform already divides the tangential projections by
    ``ϖ_l``, so this is the identity on the two tangential families with
    the ``l = 0`` row cleared.
    """
    V = coeffs.v1.a.copy()
    W = coeffs.v2.a.copy()
    V[0] = 0.0
    W[0] = 0.0
    return SphCoeffs(coeffs.L, V), SphCoeffs(coeffs.L, W)


def solve_em_single(boundary: NodalVectorField, k: float, L: int, b: float) -> EmSolution:
    """Radiating field whose tangential trace on ``r = b`` matches the data."""
    V, W = em_tangential_coeffs(vsh_forward(boundary, L))
    return EmSolution(float(k), float(b), V, W, make_context(k, b, L))


def em_from_coeffs(V: SphCoeffs, W: SphCoeffs, k: float, b: float) -> EmSolution:
    return EmSolution(float(k), float(b), V, W, make_context(k, b, V.L))


def eval_em(sol: EmSolution, r, theta, phi) -> tuple[np.ndarray, np.ndarray]:
    """``(E, H)`` in spherical components ``(..., 3)`` at points with ``r >= b``."""
    r, theta, phi = _points(r, theta, phi)
    if np.any(r < sol.b):
        raise DomainError("evaluation radius below the sphere")
    k, b, L = sol.k, sol.b, sol.L
    R, Rt, Rb, rho = radial_tables(sol.radial, r, L)
    l = np.arange(L + 1)
    ex = (slice(None),) + (None,) * r.ndim
    w = (l * (l + 1.0))[ex]
    E = vsh_synthesize(
        VshCoeffs(L, sol.V, sol.V, sol.W),
        theta,
        phi,
        radial=((b / r) * w * Rb, (b / r) * Rt, R),
    )
    ikr = 1j * k * r
    H = vsh_synthesize(
        VshCoeffs(L, sol.W, sol.W, sol.V),
        theta,
        phi,
        radial=(w * R / ikr, R * (1.0 + k * r * rho) / ikr, -1j * k * b * Rb),
    )
    return E, H


# ---------------------------------------------------------------------------
# radial two-point problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialBvpSolution:
    """Polynomial solution on ``[a, b]``: lift plus ``Σ c_j (L_j + L_{j+1})``."""

    a: float
    b: float
    G: complex
    coeffs: np.ndarray

    def _x(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.a - 1e-14) or np.any(r > self.b + 1e-14):
            raise DomainError("r outside [a, b]")
        return (2.0 * r - (self.a + self.b)) / (self.b - self.a)

    def _legendre(self):
        p = self.coeffs.size
        c = np.zeros(p + 1, dtype=complex)
        c[:p] += self.coeffs
        c[1:] += self.coeffs
        return c

    def __call__(self, r):
        x = self._x(r)
        return self.G * (1.0 - x) / 2.0 + np.polynomial.legendre.legval(x, self._legendre())

    def derivative(self, r):
        x = self._x(r)
        dc = np.polynomial.legendre.legder(self._legendre())
        dx = -self.G / 2.0 + np.polynomial.legendre.legval(x, dc)
        return dx * 2.0 / (self.b - self.a)


def solve_radial_bvp(l: int, k: float, a: float, b: float, F=None, G: complex = 0.0, H: complex = 0.0, p: int = 32) -> RadialBvpSolution:
    """Galerkin solution of ``(r²U')' + (k²r² - l(l+1))U = F`` on ``[a, b]``.

    Conditions: ``U(a) = G`` and ``U'(b) - k ρ_l(kb) U(b) = H``.  ``F`` is a
    vectorized callable of ``r`` (or None for zero).
    """
    if not 0 < a < b:
        raise DomainError("need 0 < a < b")
    if l < 0 or p < 1:
        raise DomainError("need l >= 0 and p >= 1")
    rho_b = hankel_log_derivative(l, k * b)[l]
    wl = l * (l + 1.0)
    x, wq = np.polynomial.legendre.leggauss(p + 8)
    h = 0.5 * (b - a)
    r = 0.5 * (a + b) + h * x
    V = np.polynomial.legendre.legvander(x, p)  # (q, p+1)
    dV = np.zeros_like(V)
    for n in range(1, p + 1):
        e = np.zeros(n + 1)
        e[n] = 1.0
        dV[:, n] = np.polynomial.legendre.legval(x, np.polynomial.legendre.legder(e))
    phi = V[:, :-1] + V[:, 1:]
    dphi = (dV[:, :-1] + dV[:, 1:]) / h  # d/dr
    lift = G * (1.0 - x) / 2.0
    dlift = -G / (2.0 * h) * np.ones_like(x)
    wr = wq * h
    K =-(dphi.T * (wr * r * r)) @ dphi + (phi.T * (wr * (k * k * r * r - wl))) @ phi
    # test functions at x = 1: L_j(1) + L_{j+1}(1) = 2
    vb = 2.0 * np.ones(p)
    K = K.astype(complex) + b * b * k * rho_b * np.outer(vb, vb)
    rhs = np.zeros(p, dtype=complex)
    if F is not None:
        rhs += (phi.T * wr) @ np.asarray(F(r), dtype=complex)
    rhs -= b * b * H * vb
    # lift contributions (lift vanishes at x = 1)
    rhs -= -(dphi.T * (wr * r * r)) @ dlift + (phi.T * (wr * (k * k * r * r - wl))) @ lift
    s = np.linalg.svd(K, compute_uv=False)
    if s[-1] <= s[0] * p * np.finfo(float).eps:
        raise SingularSystemError("radial Galerkin matrix is rank deficient")
    c = np.linalg.solve(K, rhs)
    return RadialBvpSolution(float(a), float(b), complex(G), c)
