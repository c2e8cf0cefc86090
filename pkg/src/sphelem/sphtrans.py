"""Forward spherical harmonic transform of nodal scalar fields.

For an element ``e = (s, t)`` the coefficient integral separates into

    𝔞[m, i] = ∫ l_i(ξ) e^{-imφ(ξ)} φ̂ dξ
    𝔟[l, m, j] = ∫ l_j(η) P̂_l^m(cos θ(η)) sin θ(η) θ̂ dη

both evaluated in closed form, and ``ã_l^m = Σ_e Σ_ij u_ij 𝔞[m,i] 𝔟[l,m,j]``.
Only ``m >= 0`` is tabulated: ``𝔞[-m] = conj(𝔞[m])`` and
``𝔟[l,-m] = (-1)^m 𝔟[l,m]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Element, NodalScalarField, SphPartition
from .oscint import FrequencyWeights, element_moment_tables, frequency_weights
from .specfun import LegendreCoeffTable, legendre_table, sph_bessel_j_table

_RE_INEG = np.array([1.0, 0.0, -1.0, 0.0])
_IM_INEG = np.array([0.0, -1.0, 0.0, 1.0])

KAHAN_THRESHOLD = 100


@dataclass(frozen=True)
class SphCoeffs:
    """Coefficients ``ã_l^m`` stored as ``a[l, L + m]`` (zero for ``|m| > l``)."""

    L: int
    a: np.ndarray

    def __call__(self, l: int, m: int) -> complex:
        return complex(self.a[l, self.L + m])

    @classmethod
    def zeros(cls, L: int) -> "SphCoeffs":
        return cls(L, np.zeros((L + 1, 2 * L + 1), dtype=complex))

    def truncated(self, L: int) -> "SphCoeffs":
        return SphCoeffs(L, self.a[: L + 1, self.L - L : self.L + L + 1].copy())

    def rows(self):
        """Iterate ``(l, m, value)`` over the triangular index set."""
        for l in range(self.L + 1):
            for m in range(-l, l + 1):
                yield l, m, self.a[l, self.L + m]


def phi_factors(element: Element, basis: LegendreCoeffTable, L: int) -> np.ndarray:
    """𝔞 block for ``m = 0..L``; shape ``(L + 1, N + 1)`` complex."""
    N = basis.N
    m = np.arange(L + 1)
    ph = element.phi_half
    j = sph_bessel_j_table(N, m * ph)  # (N+1, L+1)
    n = np.arange(N + 1)
    ineg = _RE_INEG[n % 4] + 1j * _IM_INEG[n % 4]
    G = 2.0 * ineg[None, :] * j.T  # (L+1, N+1)
    phase = np.exp(-1j * m * element.phi_mid)
    return ph * phase[:, None] * (G @ basis.v.T)


def theta_factors(
    element: Element,
    basis: LegendreCoeffTable,
    L: int,
    weights: FrequencyWeights | None = None,
    with_c: bool = False,
):
    """𝔟 block ``[l, m, j]`` for ``0 <= m <= l <= L`` (and 𝔠 if ``with_c``)."""
    if weights is None:
        weights = frequency_weights(L)
    th = element.theta_half
    Pm, Qm = element_moment_tables(weights, basis.v.T, th, element.theta_mid, with_p=with_c)
    B = th * Qm
    if with_c:
        return B, th * Pm
    return B


class _Accumulator:
    """Sum of arrays, optionally with Kahan compensation."""

    def __init__(self, shape, compensated: bool):
        self.total = np.zeros(shape, dtype=complex)
        self.comp = np.zeros(shape, dtype=complex) if compensated else None

    def add(self, x):
        if self.comp is None:
            self.total += x
            return
        y = x - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t


def _split_by_theta(partition: SphPartition):
    """Yield ``(θ-element, [(element index, φ-element)])`` per θ band."""
    nphi = partition.n_phi
    for s in range(partition.n_theta):
        idx = list(range(s * nphi, (s + 1) * nphi))
        yield partition.elements[idx[0]], [(e, partition.elements[e]) for e in idx]


def phi_tables(partition: SphPartition, L: int):
    """𝔞 blocks for each φ-interval, shape ``(n_phi, L + 1, N + 1)``."""
    basis = partition.basis
    return np.stack(
        [phi_factors(partition.elements[t], basis, L) for t in range(partition.n_phi)]
    )


def contract(values: np.ndarray, A: np.ndarray, B: np.ndarray, acc_pos, acc_neg):
    """Add one element's ``Σ_ij u_ij 𝔞[±m,i] 𝔟[l,m,j]`` to the accumulators.

    ``acc_pos`` receives ``m >= 0`` and ``acc_neg`` receives ``m >= 0`` rows
    that represent order ``-m`` (before the ``(-1)^m`` factor).
    """
    Xp = A @ values  # (L+1, J): Σ_i 𝔞[m,i] u_ij
    Xn = A.conj() @ values
    acc_pos.add(np.einsum("mj,lmj->lm", Xp, B))
    acc_neg.add(np.einsum("mj,lmj->lm", Xn, B))


def assemble(L: int, pos: np.ndarray, neg: np.ndarray) -> SphCoeffs:
    """Combine ``[l, m>=0]`` tables into a full triangular coefficient array."""
    a = np.zeros((L + 1, 2 * L + 1), dtype=complex)
    tri = np.tril(np.ones((L + 1, L + 1), dtype=bool))
    sign = np.where(np.arange(L + 1) % 2 == 0, 1.0, -1.0)
    a[:, L:] = np.where(tri, pos, 0.0)
    a[:, L::-1] = np.where(tri, neg * sign[None, :], 0.0)
    a[:, L] = pos[:, 0]
    return SphCoeffs(L, a)


def sph_forward(field: NodalScalarField, L: int, weights: FrequencyWeights | None = None) -> SphCoeffs:
    """Coefficients ``ã_l^m`` (``l <= L``) of the piecewise nodal interpolant."""
    part = field.partition
    basis = part.basis
    if weights is None:
        weights = frequency_weights(L)
    A = phi_tables(part, L)
    comp = L > KAHAN_THRESHOLD
    acc_pos = _Accumulator((L + 1, L + 1), comp)
    acc_neg = _Accumulator((L + 1, L + 1), comp)
    for el_s, members in _split_by_theta(part):
        B = theta_factors(el_s, basis, L, weights)
        for t, (e, _) in enumerate(members):
            contract(field.values[e], A[t], B, acc_pos, acc_neg)
    return assemble(L, acc_pos.total, acc_neg.total)


def sph_synthesize(coeffs: SphCoeffs, theta, phi, radial=None, chunk: int | None = None) -> np.ndarray:
    """``Σ ã_l^m f_l Y_l^m(θ, φ)`` at the given points (broadcast together).

    ``radial`` optionally gives per-point degree factors ``f_l`` with shape
    ``(L + 1,) + θ.shape``; it defaults to one.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    shape = theta.shape
    th, ph = theta.ravel(), phi.ravel()
    L = coeffs.L
    if radial is None:
        rad = np.ones((L + 1, th.size))
    else:
        rad = np.broadcast_to(radial, (L + 1,) + shape).reshape(L + 1, -1)
    if chunk is None:
        chunk = max(1, 4_000_000 // (L + 1) ** 2)
    m = np.arange(L + 1)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    pos = coeffs.a[:, L:]
    neg = coeffs.a[:, L::-1] * sign[None, :]
    neg[:, 0] = 0.0
    out = np.empty(th.shape, dtype=complex)
    for c in range(0, th.size, chunk):
        sl = slice(c, c + chunk)
        P = legendre_table(L, np.cos(th[sl])) * rad[:, None, sl]  # (L+1, L+1, p)
        e = np.exp(1j * np.outer(m, ph[sl]))  # (L+1, p)
        Sp = np.einsum("lm,lmp->mp", pos, P)
        Sn = np.einsum("lm,lmp->mp", neg, P)
        out[sl] = np.sum(Sp * e + Sn * e.conj(), axis=0)
    return out.reshape(shape)
