"""Analytic incident fields and their exact expansion coefficients."""

from __future__ import annotations

import numpy as np

from .specfun import legendre_table, sph_bessel_j_table
from .sphtrans import SphCoeffs
from .vshtrans import VshCoeffs


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def sphere_points(theta, phi, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Cartesian points ``center + radius * r̂(θ, φ)``; shape ``θ.shape + (3,)``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    d = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
    return np.asarray(center, dtype=float) + radius * d


def plane_wave(k: float, direction):
    """``x -> exp(i k k̂·x)`` for Cartesian arrays ``(..., 3)``."""
    kh = unit(direction)
    return lambda x: np.exp(1j * k * (np.asarray(x) @ kh))


def spherical_wave(k: float, source):
    """``x -> exp(i k |x - x0|)``."""
    x0 = np.asarray(source, dtype=float)
    return lambda x: np.exp(1j * k * np.linalg.norm(np.asarray(x) - x0, axis=-1))


def on_sphere(fn, radius: float = 1.0, center=(0.0, 0.0, 0.0)):
    """Restrict a Cartesian function to a sphere as a function of ``(θ, φ)``."""
    return lambda th, ph: fn(sphere_points(th, ph, radius, center))


def gradient_test_field(k: float, direction, radius: float = 1.0):
    """``v = ∇u + ∇u × e_r`` for ``u = exp(i k k̂·x)`` on ``|x| = radius``,
    returned as a Cartesian-valued function of ``(θ, φ)``."""
    kh = unit(direction)

    def F(th, ph):
        x = sphere_points(th, ph, radius)
        u = np.exp(1j * k * (x @ kh))[..., None]
        return 1j * k * (kh + np.cross(kh, x) / radius) * u

    return F


def _conj_y_table(L: int, direction) -> np.ndarray:
    """``conj(Y_l^m(k̂))`` as ``[l, L + m]``."""
    kh = unit(direction)
    th = np.arccos(np.clip(kh[2], -1.0, 1.0))
    ph = np.arctan2(kh[1], kh[0])
    P = legendre_table(L, np.array(np.cos(th)))
    out = np.zeros((L + 1, 2 * L + 1), dtype=complex)
    for m in range(L + 1):
        y = P[m:, m] * np.exp(1j * m * ph)
        out[m:, L + m] = np.conj(y)
        if m:
            # Y^{-m} = (-1)^m conj(Y^m)
            out[m:, L - m] = (-1) ** m * y
    return out


def funk_hecke_coeffs(k: float, radius: float, direction, L: int) -> SphCoeffs:
    """``a_l^m = 4π i^l j_l(kR) conj(Y_l^m(k̂))``."""
    j = sph_bessel_j_table(L, k * radius)
    l = np.arange(L + 1)
    fac = 4.0 * np.pi * (1j) ** l * j
    return SphCoeffs(L, fac[:, None] * _conj_y_table(L, direction))


def gradient_test_coeffs(k: float, radius: float, direction, L: int) -> VshCoeffs:
    """Exact coefficients of :func:`gradient_test_field`."""
    j = sph_bessel_j_table(L + 1, k * radius)
    l = np.arange(L + 1)
    # j_l' = l j_l / z - j_{l+1}
    z = k * radius
    jd = l * j[: L + 1] / z - j[1 : L + 2]
    cy = 4.0 * np.pi * (1j) ** l[:, None] * _conj_y_table(L, direction)
    r = cy * (k * jd)[:, None]
    t = cy * (j[: L + 1] / radius)[:, None]
    t[0] = 0.0
    return VshCoeffs(L, SphCoeffs(L, r), SphCoeffs(L, t), SphCoeffs(L, t.copy()))


def coeff_error(a: SphCoeffs, b: SphCoeffs, L: int | None = None) -> float:
    """``max_{l<=L, |m|<=l} |a_l^m - b_l^m|``."""
    L = min(a.L, b.L) if L is None else L
    return float(np.max(np.abs(a.truncated(L).a - b.truncated(L).a)))


def vsh_error(a: VshCoeffs, b: VshCoeffs, L: int | None = None) -> float:
    return max(coeff_error(x, y, L) for x, y in ((a.r, b.r), (a.v1, b.v1), (a.v2, b.v2)))


def degree_maxima(c: SphCoeffs) -> np.ndarray:
    """``max_m |c_l^m|`` for each degree."""
    return np.max(np.abs(c.a), axis=1)
