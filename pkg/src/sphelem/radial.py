"""Overflow-free outgoing radial ratios.

    R_l(r)  = h_l(kr) / h_l(kb)           = exp(k ∫_b^r ρ_l(kξ) dξ)
    R̃_l(r) = Z_l(kr) / Z_l(kb)           = R_l(r) (1 + kr ρ_l(kr)) / (1 + kb ρ_l(kb))
    R̆_l(r) = h_l(kr) / Z_l(kb)           = R_l(r) / (1 + kb ρ_l(kb))

with ``Z_l(z) = h_l(z) + z h_l'(z)`` and ``ρ_l = h_l'/h_l``.  The integral is
taken with a fixed composite Gauss-Legendre rule, so results are
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import DomainError, PoleError, hankel_log_derivative

NODES_PER_PANEL = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(NODES_PER_PANEL)
_PANEL_CHUNK = 256


@dataclass(frozen=True)
class RadialContext:
    k: float
    b: float
    l_max: int
    rho_at_b: np.ndarray

    @property
    def z_denominator(self) -> np.ndarray:
        """``1 + kb ρ_l(kb)`` for ``l = 0..l_max``."""
        return 1.0 + self.k * self.b * self.rho_at_b


def make_context(k: float, b: float, l_max: int) -> RadialContext:
    if k <= 0 or b <= 0:
        raise DomainError("k and b must be positive")
    rho = hankel_log_derivative(l_max, k * b)
    rho.setflags(write=False)
    return RadialContext(float(k), float(b), int(l_max), rho)


def _breakpoints(b: float, radii: np.ndarray, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Panel breakpoints from ``b`` through every requested radius.

    Each segment between consecutive radii gets at least four panels, no
    panel exceeds a quarter wavelength, and no panel exceeds half its start
    radius (keeps the ``1/ξ`` behaviour of ρ_l well resolved when ``kb`` is
    small).  Returns breakpoints and, for each radius, the index of its
    breakpoint.
    """
    hmax = math.pi / (2.0 * k)
    pts = [b]
    idx = []
    prev = b
    for r in radii:
        seg = r - prev
        if seg > 0:
            x = prev
            hseg = seg / 4.0
            while True:
                h = min(hmax, 0.5 * x, hseg)
                if x + h >= r * (1 - 1e-15):
                    break
                x += h
                pts.append(x)
            pts.append(float(r))
            prev = float(r)
        idx.append(len(pts) - 1)
    return np.array(pts), np.array(idx)


def log_ratio_table(ctx: RadialContext, r, l_max: int | None = None) -> np.ndarray:
    """``log R_l(r)`` for ``l = 0..l_max``; shape ``(l_max + 1,) + r.shape``."""
    l_max = ctx.l_max if l_max is None else l_max
    r = np.asarray(r, dtype=float)
    if np.any(r < ctx.b):
        raise DomainError("r must be >= b")
    flat = r.ravel()
    uniq, inv = np.unique(flat, return_inverse=True)
    bp, idx = _breakpoints(ctx.b, uniq, ctx.k)
    cum = np.zeros((l_max + 1, bp.size), dtype=complex)
    acc = np.zeros(l_max + 1, dtype=complex)
    for c in range(0, bp.size - 1, _PANEL_CHUNK):
        lo = bp[c : c + _PANEL_CHUNK]
        hi = bp[c + 1 : c + 1 + _PANEL_CHUNK]
        lo = lo[: hi.size]
        half = 0.5 * (hi - lo)
        xi = 0.5 * (hi + lo)[:, None] + half[:, None] * _GL_X[None, :]
        rho = hankel_log_derivative(l_max, ctx.k * xi)  # (l, panels, nodes)
        panel = (rho @ _GL_W) * half[None, :]
        part = acc[:, None] + np.cumsum(panel, axis=1)
        cum[:, c + 1 : c + 1 + hi.size] = part
        acc = part[:, -1]
    out = ctx.k * cum[:, idx][:, inv]
    return out.reshape((l_max + 1,) + r.shape)


def ratio_table(ctx: RadialContext, r, l_max: int | None = None) -> np.ndarray:
    """``R_l(r)``; underflows gracefully to zero for very large ``l``."""
    with np.errstate(under="ignore"):
        return np.exp(log_ratio_table(ctx, r, l_max))


def radial_tables(ctx: RadialContext, r, l_max: int | None = None):
    """``(R, R̃, R̆, ρ_l(kr))`` for all ``l`` at the radii ``r``."""
    l_max = ctx.l_max if l_max is None else l_max
    r = np.asarray(r, dtype=float)
    den = ctx.z_denominator[: l_max + 1]
    if np.any(np.abs(den) < 1e-300):
        bad = int(np.flatnonzero(np.abs(den) < 1e-300)[0])
        raise PoleError(f"Z_{bad}(kb) vanishes")
    R = ratio_table(ctx, r, l_max)
    rho_r = hankel_log_derivative(l_max, ctx.k * r)
    ex = (slice(None),) + (None,) * r.ndim
    Rt = R * (1.0 + ctx.k * r * rho_r) / den[ex]
    Rb = R / den[ex]
    return R, Rt, Rb, rho_r


def outgoing_ratio(ctx: RadialContext, l: int, r: float) -> complex:
    """``R_l(r) = h_l(kr)/h_l(kb)``."""
    if r < ctx.b:
        raise DomainError("r must be >= b")
    if r == ctx.b:
        return 1.0 + 0j
    return complex(ratio_table(ctx, np.array([r]), l)[l, 0])


def z_ratios(ctx: RadialContext, l: int, r: float) -> tuple[complex, complex]:
    """``(R̃_l(r), R̆_l(r))``."""
    if r < ctx.b:
        raise DomainError("r must be >= b")
    den = 1.0 + ctx.k * ctx.b * hankel_log_derivative(l, ctx.k * ctx.b)[l]
    if abs(den) < 1e-300:
        raise PoleError(f"Z_{l}(kb) vanishes")
    R = outgoing_ratio(ctx, l, r)
    rho_r = hankel_log_derivative(l, ctx.k * r)[l]
    return complex(R * (1.0 + ctx.k * r * rho_r) / den), complex(R / den)
