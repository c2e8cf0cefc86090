"""Closed-form oscillatory integrals over [-1, 1].

    C_n(λ, ρ) = ∫ P_n(x) cos(λx + ρ) dx
    S_n(λ, ρ) = ∫ P_n(x) sin(λx + ρ) dx
    P^n_lm(λ, ρ) = ∫ P_n(x) P̂_l^m(cos(λx + ρ)) dx
    Q^n_lm(λ, ρ) = ∫ P_n(x) P̂_l^m(cos(λx + ρ)) sin(λx + ρ) dx

All four reduce to spherical Bessel functions through
``∫ P_n(x) e^{-iλx} dx = 2 i^{-n} j_n(λ)``.  The P and Q families are
expanded in the trigonometric form of P̂_l^m; the products with sin are
rewritten as differences at shifted frequencies, then regrouped so each
frequency carries a single weight.  Every frequency used is a non-negative
integer multiple of λ, so the Bessel backend only sees non-negative
arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import TrigForm, sph_bessel_j_table, trig_table

# i^{-n} for n mod 4
_RE_INEG = np.array([1.0, 0.0, -1.0, 0.0])
_IM_INEG = np.array([0.0, -1.0, 0.0, 1.0])


def _j_signed(nmax: int, lam: np.ndarray) -> np.ndarray:
    """j_n(λ) for real λ of either sign, shape ``(nmax + 1,) + λ.shape``."""
    lam = np.asarray(lam, dtype=float)
    j = sph_bessel_j_table(nmax, np.abs(lam))
    neg = lam < 0
    if np.any(neg):
        odd = (np.arange(nmax + 1) % 2 == 1).reshape((-1,) + (1,) * lam.ndim)
        j = np.where(odd & neg, -j, j)
    return j


def legendre_fourier(n: int, lam: float, rho: float) -> complex:
    """∫_{-1}^{1} P_n(x) e^{-i(λx + ρ)} dx."""
    if lam == 0.0:
        return complex(2.0 * np.exp(-1j * rho)) if n == 0 else 0j
    ineg = complex(_RE_INEG[n % 4], _IM_INEG[n % 4])
    return complex(2.0 * ineg * np.exp(-1j * rho) * _j_signed(n, np.array(lam))[n])


def cs_table(nmax: int, lam, rho):
    """``(C, S)`` for ``n = 0..nmax``; arrays of shape ``λ.shape + (nmax + 1,)``.

    ``lam`` and ``rho`` broadcast together.  ``λ == 0`` is detected exactly.
    """
    lam, rho = np.broadcast_arrays(np.asarray(lam, float), np.asarray(rho, float))
    n = np.arange(nmax + 1)
    re = _RE_INEG[n % 4]
    im = _IM_INEG[n % 4]
    cr = np.cos(rho)[..., None]
    sr = np.sin(rho)[..., None]
    j = np.moveaxis(_j_signed(nmax, lam), 0, -1)
    C = 2.0 * j * (re * cr + im * sr)
    S = 2.0 * j * (re * sr - im * cr)
    zero = lam == 0.0
    if np.any(zero):
        delta = (n == 0).astype(float)
        C = np.where(zero[..., None], 2.0 * delta * cr, C)
        S = np.where(zero[..., None], 2.0 * delta * sr, S)
    return C, S


def cs_integrals(n: int, lam: float, rho: float) -> tuple[float, float]:
    """``(C_n(λ, ρ), S_n(λ, ρ))``."""
    C, S = cs_table(n, lam, rho)
    return float(C[n]), float(S[n])


# ---------------------------------------------------------------------------
# frequency weights
# ---------------------------------------------------------------------------


def _p_weights(l: int, A: np.ndarray, fmax: int) -> np.ndarray:
    """Rows (one per order) of weights over frequencies ``0..fmax`` so that
    P̂_l^m(cos t) = Σ_f w_f trig(f t), trig = cos (m even) / sin (m odd)."""
    W = np.zeros((A.shape[0], fmax + 1))
    K = A.shape[1]
    if l % 2 == 0:
        W[:, 0 : 2 * K : 2] = A
    else:
        W[:, 1 : 2 * K : 2] = A
    return W


def _q_weights(l: int, A: np.ndarray, fmax: int, orders=None) -> np.ndarray:
    """Rows (for ``orders``, default ``0..l``) of weights over frequencies so that
    P̂_l^m(cos t) sin t = Σ_f w_f trig'(f t), trig' = sin (m even) / cos (m odd).
    """
    M, K = A.shape
    W = np.zeros((M, fmax + 1))
    half = 0.5 * A
    if orders is None:
        orders = np.arange(M)
    even_m = (np.asarray(orders) % 2 == 0)[:, None]
    if l % 2 == 0:
        # cos(2k t) sin t = ½[sin((2k+1)t) - sin((2k-1)t)]
        # sin(2k t) sin t = ½[cos((2k-1)t) - cos((2k+1)t)]
        sgn = np.where(even_m, 1.0, -1.0)
        W[:, 1 : 2 * K + 1 : 2] += sgn * half
        W[:, 1 : 2 * K - 1 : 2] -= sgn * half[:, 1:]
        # k = 0 (even m only): the -1 frequency folds onto +1 for sine
        W[:, 1] += np.where(even_m[:, 0], half[:, 0], 0.0)
        # odd m has no k = 0 term; its column 0 is zero in A
    else:
        # cos((2k-1) t) sin t = ½[sin(2k t) - sin((2k-2) t)]
        # sin((2k-1) t) sin t = ½[cos((2k-2) t) - cos(2k t)]
        sgn = np.where(even_m, 1.0, -1.0)
        W[:, 2 : 2 * K + 1 : 2] += sgn * half
        W[:, 0 : 2 * K - 1 : 2] -= sgn * half
    return W


def _trig_for(tf: TrigForm) -> np.ndarray:
    """Full-width row (k from 0 for even l, from 1 for odd l)."""
    if tf.l % 2 == 0 and tf.m % 2 == 1:
        return np.concatenate([[0.0], tf.coeffs])
    return tf.coeffs


def p_integral(trig_form: TrigForm, n: int, lam: float, rho: float) -> float:
    """P^n_lm(λ, ρ) from the trigonometric form of P̂_l^m."""
    l, m = trig_form.l, trig_form.m
    w = _p_weights(l, _trig_for(trig_form)[None, :], l + 1)[0]
    f = np.arange(l + 2)
    C, S = cs_table(n, f * lam, f * rho)
    return float(w @ (S[:, n] if m % 2 else C[:, n]))


def q_integral(trig_form: TrigForm, n: int, lam: float, rho: float) -> float:
    """Q^n_lm(λ, ρ) from the trigonometric form of P̂_l^m."""
    l, m = trig_form.l, trig_form.m
    w = _q_weights(l, _trig_for(trig_form)[None, :], l + 1, [m])[0]
    f = np.arange(l + 2)
    C, S = cs_table(n, f * lam, f * rho)
    return float(w @ (C[:, n] if m % 2 else S[:, n]))


# ---------------------------------------------------------------------------
# batched tables for the transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrequencyWeights:
    """P and Q frequency weights for all ``0 <= m <= l <= L``.

    ``p[l]`` and ``q[l]`` have shape ``(l + 1, L + 2)``.
    """

    L: int
    p: tuple
    q: tuple


def frequency_weights(L: int, trig=None) -> FrequencyWeights:
    """Build P/Q weights from a trig table (built on demand if not given)."""
    if trig is None:
        trig = trig_table(L + 1)
    p, q = [], []
    for l in range(L + 1):
        A = trig[l]
        wp = _p_weights(l, A, L + 1)
        wq = _q_weights(l, A, L + 1)
        wp.setflags(write=False)
        wq.setflags(write=False)
        p.append(wp)
        q.append(wq)
    return FrequencyWeights(L, tuple(p), tuple(q))


def element_moment_tables(
    weights: FrequencyWeights, proj: np.ndarray, lam: float, rho: float, with_p: bool = True
):
    """Projected P and Q integrals for one θ-interval.

    ``proj`` has shape ``(nmax + 1, J)`` and maps Legendre moments to output
    columns (for a Lagrange basis this is ``v.T``).  Returns ``(Pm, Qm)``,
    each of shape ``(L + 1, L + 1, J)`` indexed ``[l, m, j]`` with
    ``Pm[l, m, j] = Σ_n P^n_lm(λ, ρ) proj[n, j]`` (zero for ``m > l``).
    ``Pm`` is None when ``with_p`` is false.
    """
    L = weights.L
    nmax = proj.shape[0] - 1
    f = np.arange(L + 2)
    C, S = cs_table(nmax, f * lam, f * rho)
    CV = C @ proj
    SV = S @ proj
    J = proj.shape[1]
    Pm = np.zeros((L + 1, L + 1, J)) if with_p else None
    Qm = np.zeros((L + 1, L + 1, J))
    for l in range(L + 1):
        wp, wq = weights.p[l], weights.q[l]
        if with_p:
            Pm[l, 0 : l + 1 : 2] = wp[0::2] @ CV
            Pm[l, 1 : l + 1 : 2] = wp[1::2] @ SV
        Qm[l, 0 : l + 1 : 2] = wq[0::2] @ SV
        Qm[l, 1 : l + 1 : 2] = wq[1::2] @ CV
    return Pm, Qm
