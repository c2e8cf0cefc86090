"""Vector spherical harmonic transform of nodal vector fields.

Basis (for ``l >= 1``, with ``ϖ_l = l(l+1)``)::

    Y_l^m  = Y_l^m e_r
    Ψ_l^m  = ∇_S Y_l^m = e^{imφ} [dP̂ e_θ + im (P̂/sin θ) e_φ]
    Φ_l^m  = Ψ_l^m x e_r = e^{imφ} [im (P̂/sin θ) e_θ - dP̂ e_φ]

Tangential coefficients carry the ``1/ϖ_l`` factor, so a sampled Ψ_l^m has
``ṽ^(1) = 1``.  Extra per-element factors beyond the scalar transform::

    𝔠[l, m, j] = ∫ l_j(η) P̂_l^m(cos θ(η)) θ̂ dη
    𝔡[l, m, j] = ∫ l_j(η) (d/dθ P̂_l^m)(cos θ(η)) sin θ(η) θ̂ dη

with 𝔡 obtained from 𝔟 at the neighbouring orders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import NodalVectorField
from .oscint import FrequencyWeights, frequency_weights
from .specfun import legendre_table
from .sphtrans import (
    KAHAN_THRESHOLD,
    SphCoeffs,
    _Accumulator,
    _split_by_theta,
    assemble,
    phi_tables,
    theta_factors,
)


@dataclass(frozen=True)
class VshCoeffs:
    """Radial and tangential coefficients, each as :class:`SphCoeffs`."""

    L: int
    r: SphCoeffs
    v1: SphCoeffs
    v2: SphCoeffs

    def rows(self):
        """Iterate ``(l, m, family, value)``."""
        for fam, c in (("r", self.r), ("1", self.v1), ("2", self.v2)):
            for l, m, val in c.rows():
                yield l, m, fam, val


def _derivative_weights(L: int):
    """``c1[l, m]``, ``c2[l, m]`` such that
    d/dθ P̂_l^m = c1 P̂_l^{m-1} - c2 P̂_l^{m+1} with P̂_l^{-1} = -P̂_l^1."""
    l = np.arange(L + 1)[:, None].astype(float)
    m = np.arange(L + 1)[None, :].astype(float)
    with np.errstate(invalid="ignore"):
        c1 = 0.5 * np.sqrt(np.clip((l + m) * (l - m + 1.0), 0.0, None))
        c2 = 0.5 * np.sqrt(np.clip((l + m + 1.0) * (l - m), 0.0, None))
    tri = m <= l
    return np.where(tri, c1, 0.0), np.where(tri, c2, 0.0)


def d_factors(B: np.ndarray) -> np.ndarray:
    """𝔡 block ``[l, m, j]`` from the 𝔟 block of the same element."""
    L = B.shape[0] - 1
    c1, c2 = _derivative_weights(L)
    lower = np.empty_like(B)  # 𝔟[l, m-1]
    lower[:, 1:] = B[:, :-1]
    lower[:, 0] = -B[:, 1] if L >= 1 else 0.0
    upper = np.zeros_like(B)  # 𝔟[l, m+1]
    upper[:, :-1] = B[:, 1:]
    D = c1[..., None] * lower - c2[..., None] * upper
    tri = np.tril(np.ones((L + 1, L + 1), dtype=bool))
    return np.where(tri[..., None], D, 0.0)


def c_factors(element, basis, L: int, weights: FrequencyWeights | None = None) -> np.ndarray:
    """𝔠 block ``[l, m, j]``."""
    _, C = theta_factors(element, basis, L, weights, with_c=True)
    return C


def vsh_forward(field: NodalVectorField, L: int, weights: FrequencyWeights | None = None) -> VshCoeffs:
    """Coefficients ``(ṽ^r, ṽ^(1), ṽ^(2))`` for ``l <= L``."""
    part = field.partition
    basis = part.basis
    if weights is None:
        weights = frequency_weights(L)
    A = phi_tables(part, L)
    comp = L > KAHAN_THRESHOLD
    shape = (L + 1, L + 1)
    names = ("UB", "VD", "WC", "VC", "WD")
    acc = {(k, s): _Accumulator(shape, comp) for k in names for s in "pn"}
    U, V, W = field.U.values, field.V.values, field.W.values
    for el_s, members in _split_by_theta(part):
        B, C = theta_factors(el_s, basis, L, weights, with_c=True)
        D = d_factors(B)
        for t, (e, _) in enumerate(members):
            for s, At in (("p", A[t]), ("n", A[t].conj())):
                XU, XV, XW = At @ U[e], At @ V[e], At @ W[e]
                acc["UB", s].add(np.einsum("mj,lmj->lm", XU, B))
                acc["VD", s].add(np.einsum("mj,lmj->lm", XV, D))
                acc["WC", s].add(np.einsum("mj,lmj->lm", XW, C))
                acc["VC", s].add(np.einsum("mj,lmj->lm", XV, C))
                acc["WD", s].add(np.einsum("mj,lmj->lm", XW, D))
    T = {key: a.total for key, a in acc.items()}
    l = np.arange(L + 1)
    inv = np.zeros(L + 1)
    inv[1:] = 1.0 / (l[1:] * (l[1:] + 1.0))
    inv = inv[:, None]
    im = 1j * np.arange(L + 1)[None, :]
    r = assemble(L, T["UB", "p"], T["UB", "n"])
    # for order -m the factor im becomes -im; assemble applies (-1)^m
    v1 = assemble(
        L,
        inv * (T["VD", "p"] - im * T["WC", "p"]),
        inv * (T["VD", "n"] + im * T["WC", "n"]),
    )
    v2 = assemble(
        L,
        -inv * (im * T["VC", "p"] + T["WD", "p"]),
        -inv * (-im * T["VC", "n"] + T["WD", "n"]),
    )
    return VshCoeffs(L, r, v1, v2)


def angular_tables(L: int, theta):
    """``(P, dP, Ps)`` for ``0 <= m <= l <= L``: P̂_l^m, d/dθ P̂_l^m and
    P̂_l^m / sin θ (zero for m = 0), each shaped ``(L+1, L+1) + θ.shape``.

    Built from recurrences only, so poles need no special handling.
    """
    theta = np.asarray(theta, dtype=float)
    P1 = legendre_table(L + 1, np.cos(theta))
    P = P1[: L + 1, : L + 1]
    c1, c2 = _derivative_weights(L)
    ex = (slice(None), slice(None)) + (None,) * theta.ndim
    lower = np.empty_like(P)
    lower[:, 1:] = P[:, :-1]
    lower[:, 0] = -P[:, 1] if L >= 1 else 0.0
    upper = np.zeros_like(P)
    upper[:, :-1] = P[:, 1:]
    dP = c1[ex] * lower - c2[ex] * upper
    # P̂_l^m / sin θ from degree l + 1
    l = np.arange(L + 1)[:, None].astype(float)
    m = np.arange(L + 1)[None, :].astype(float)
    q = (2 * l + 1) / (2 * l + 3)
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = np.sqrt(q * (l - m + 1) * (l - m + 2)) / (2 * m)
        w2 = np.sqrt(q * (l + m + 1) * (l + m + 2)) / (2 * m)
    valid = (m >= 1) & (m <= l)
    w1 = np.where(valid, w1, 0.0)
    w2 = np.where(valid, w2, 0.0)
    Pl1 = P1[1 : L + 2]  # degree l + 1, orders 0..L+1
    below = np.zeros_like(P)
    below[:, 1:] = Pl1[:, :L]
    Ps = w1[ex] * below + w2[ex] * Pl1[:, 1 : L + 2]
    return P, dP, Ps


def vsh_synthesize(coeffs: VshCoeffs, theta, phi, radial=None, chunk: int | None = None) -> np.ndarray:
    """Spherical components ``(v_r, v_θ, v_φ)`` at the points; shape ``(..., 3)``.

    ``radial`` optionally holds three per-point degree factors
    ``(f^r, f^(1), f^(2))``, each shaped ``(L + 1,) + θ.shape``, multiplying
    the Y, Ψ and Φ families respectively.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    shape = theta.shape
    th, ph = theta.ravel(), phi.ravel()
    L = coeffs.L
    if radial is None:
        one = np.ones((L + 1, th.size))
        fr = f1 = f2 = one
    else:
        fr, f1, f2 = (np.broadcast_to(f, (L + 1,) + shape).reshape(L + 1, -1) for f in radial)
    if chunk is None:
        chunk = max(1, 1_000_000 // (L + 1) ** 2)
    m = np.arange(L + 1)
    sign = np.where(m % 2 == 0, 1.0, -1.0)

    def split(c: SphCoeffs):
        pos = c.a[:, L:]
        neg = c.a[:, L::-1] * sign[None, :]
        neg[:, 0] = 0.0
        return pos, neg

    (rp, rn), (ap, an), (bp, bn) = split(coeffs.r), split(coeffs.v1), split(coeffs.v2)
    out = np.empty(th.shape + (3,), dtype=complex)
    im = 1j * m[:, None]
    for c in range(0, th.size, chunk):
        sl = slice(c, c + chunk)
        P, dP, Ps = angular_tables(L, th[sl])
        e = np.exp(1j * np.outer(m, ph[sl]))
        en = e.conj()
        gr, g1, g2 = fr[:, None, sl], f1[:, None, sl], f2[:, None, sl]

        def s(coef, T, g):
            return np.einsum("lm,lmp->mp", coef, T * g)

        # order -m contributes (-1)^m conj-phase terms with im -> -im
        vr = np.sum(s(rp, P, gr) * e + s(rn, P, gr) * en, axis=0)
        vt = np.sum(
            (s(ap, dP, g1) + im * s(bp, Ps, g2)) * e
            + (s(an, dP, g1) - im * s(bn, Ps, g2)) * en,
            axis=0,
        )
        vp = np.sum(
            (im * s(ap, Ps, g1) - s(bp, dP, g2)) * e
            + (-im * s(an, Ps, g1) - s(bn, dP, g2)) * en,
            axis=0,
        )
        out[sl, 0], out[sl, 1], out[sl, 2] = vr, vt, vp
    return out.reshape(shape + (3,))


def vsh_basis_sample(l: int, m: int, kind: str, theta, phi) -> np.ndarray:
    """Spherical components of ``Y``, ``Ψ`` or ``Φ`` (``kind`` in r/psi/phi)."""
    L = max(l, 1)
    c = {f: SphCoeffs.zeros(L) for f in ("r", "1", "2")}
    fam = {"r": "r", "psi": "1", "phi": "2"}[kind]
    c[fam].a[l, L + m] = 1.0
    return vsh_synthesize(VshCoeffs(L, c["r"], c["1"], c["2"]), theta, phi)
