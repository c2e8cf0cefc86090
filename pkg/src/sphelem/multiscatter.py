"""Multiple spherical scatterers.

Each scatterer ``i`` radiates ``u_i = Σ A^i_lm ψ_l^m(r_i)`` with the
normalized outgoing functions ``ψ_l^m(r_i) = h_l(k r_i)/h_l(k a_i) Y_l^m``.
On sphere ``j`` these re-expand as ``Σ Ψ_{nl}^{sm}(b_ij) Y_n^s`` with

    Ψ_{nl}^{sm}(b_ij) = S_{nl}^{sm}(b_ij) j_n(k a_j) / h_l(k a_i),
    b_ij = O_j - O_i.

Ψ is built directly by recurrences in the normalized quantities, so the raw
separation coefficients S (which overflow at high order) never appear.
The recurrences are run in the convention ``Y^{-m} = conj(Y^m)`` and the
result is converted with the sign ``(-1)^m`` for negative orders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .grid import NodalScalarField, eval_nodal_field
from .radial import make_context, ratio_table
from .specfun import (
    DomainError,
    PoleError,
    hankel_log,
    hankel_ratio_seq,
    legendre_table,
    sph_bessel_j_log,
    sph_bessel_j_ratio_seq,
)
from .sphtrans import SphCoeffs, sph_forward, sph_synthesize


class DimensionError(ValueError):
    """Inputs of inconsistent size."""


def lm_index(l, m):
    """Flat index of ``(l, m)`` in the order ``l = 0.., m = -l..l``."""
    return l * l + l + m


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScattererSet:
    centers: np.ndarray  # (M, 3)
    radii: np.ndarray  # (M,)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        a = np.atleast_1d(np.asarray(self.radii, dtype=float))
        if c.shape[1] != 3 or c.shape[0] != a.size:
            raise DimensionError("centers must be (M, 3) with one radius each")
        if np.any(a <= 0):
            raise DomainError("radii must be positive")
        for i in range(a.size):
            for j in range(i + 1, a.size):
                if np.linalg.norm(c[j] - c[i]) <= a[i] + a[j]:
                    raise DomainError(f"scatterers {i} and {j} overlap")
        c.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", a)

    @property
    def M(self) -> int:
        return self.radii.size

    def offset(self, i: int, j: int) -> np.ndarray:
        """``b_ij``: position of ``O_j`` relative to ``O_i``."""
        return self.centers[j] - self.centers[i]

    def local(self, i: int, points):
        """Local spherical coordinates ``(r, θ, φ)`` of points about ``O_i``."""
        d = np.asarray(points, dtype=float) - self.centers[i]
        r = np.linalg.norm(d, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            th = np.arccos(np.clip(np.where(r > 0, d[..., 2] / r, 1.0), -1.0, 1.0))
        ph = np.arctan2(d[..., 1], d[..., 0])
        return r, th, ph


# ---------------------------------------------------------------------------
# translation coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TranslationTable:
    """``data[lm_index(n, s), lm_index(l, m)] = Ψ_{nl}^{sm}(b_ij)``."""

    pair: tuple[int, int]
    L: int
    data: np.ndarray

    def __call__(self, n: int, l: int, s: int, m: int) -> complex:
        return complex(self.data[lm_index(n, s), lm_index(l, m)])


def _a_coef(n, m):
    """``a_n^m``; zero for ``n < |m|``."""
    n = np.asarray(n, dtype=float)
    am = np.abs(np.asarray(m, dtype=float))
    with np.errstate(invalid="ignore"):
        v = np.sqrt((n + 1 + am) * (n + 1 - am) / ((2 * n + 1) * (2 * n + 3)))
    return np.where(n >= am, v, 0.0)


def _b_coef(n, m):
    """``b_n^m``: positive branch for ``m >= 0``, negative for ``m < 0``."""
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    with np.errstate(invalid="ignore"):
        v = np.sqrt((n - m - 1) * (n - m) / ((2 * n - 1) * (2 * n + 1)))
    v = np.where(m >= 0, v, -v)
    return np.where((np.abs(m) <= n) & (n >= 1), v, 0.0)


def _shift(X: np.ndarray, dn: int, ds: int) -> np.ndarray:
    """``Y[n, s] = X[n + dn, s + ds]`` with zeros outside."""
    Y = np.zeros_like(X)
    N, S = X.shape
    n0, n1 = max(0, -dn), min(N, N - dn)
    s0, s1 = max(0, -ds), min(S, S - ds)
    Y[n0:n1, s0:s1] = X[n0 + dn : n1 + dn, s0 + ds : s1 + ds]
    return Y


def _seed_column(offset, k: float, a_i: float, a_j: float, nmax: int, pad: int) -> np.ndarray:
    """``Ψ_{n0}^{s0}`` on the ``(n, s)`` grid, built from logarithms."""
    b = np.asarray(offset, dtype=float)
    bn = float(np.linalg.norm(b))
    th = float(np.arccos(np.clip(b[2] / bn, -1.0, 1.0)))
    ph = float(np.arctan2(b[1], b[0]))
    logj, sgnj = sph_bessel_j_log(nmax, k * a_j)
    logh = hankel_log(nmax, k * bn)
    logh0 = hankel_log(0, k * a_i)[0]
    n = np.arange(nmax + 1)
    with np.errstate(under="ignore"):
        radial = sgnj * np.exp(logj + logh - logh0)
    radial = np.where(np.isfinite(logj), radial, 0.0)
    radial *= np.where(n % 2, -1.0, 1.0) * np.sqrt(4.0 * np.pi)
    # Y^{-s} in the conjugate-symmetric convention: conj(P̂ e^{isφ}) for s >= 0
    P = legendre_table(nmax, np.cos(th))  # [n, |s|]
    X = np.zeros((nmax + 1, 2 * pad + 1), dtype=complex)
    for s in range(-nmax, nmax + 1):
        ys = P[:, abs(s)] * np.exp(-1j * s * ph)
        X[:, pad + s] = radial * ys * (n >= abs(s))
    return X


def _row_index(L: int, pad: int):
    """Grid positions of the output rows ``(n, s)``, ``n <= L``."""
    rn = np.concatenate([np.full(2 * n + 1, n) for n in range(L + 1)])
    rs = np.concatenate([np.arange(-n, n + 1) for n in range(L + 1)])
    return rn, rs + pad, rs


def _conv_sign(order):
    """``(-1)^m`` for negative odd ``m``: module Y versus ``Y^{-m} = conj(Y^m)``."""
    order = np.asarray(order)
    return np.where((order < 0) & (order % 2 == 1), -1.0, 1.0)


def translation_columns(offset, k: float, a_i: float, a_j: float, L: int, orders=None) -> dict:
    """Ψ columns per order ``m``.

    Returns ``{m: array}`` where ``array[lm_index(n, s), l - |m|]`` is
    ``Ψ_{nl}^{sm}`` for ``n, l <= L``.  ``orders`` limits which ``m`` are
    advanced in degree (all by default).
    """
    if k <= 0:
        raise DomainError("k must be positive")
    nmax = 2 * L + 2
    pad = nmax + 1
    # α_n = j_n(ka_j)/j_{n+1}(ka_j); 1/α_{n-1} = j_n/j_{n-1}
    alpha = sph_bessel_j_ratio_seq(nmax, k * a_j)
    inv_alpha_prev = np.zeros(nmax + 1)
    inv_alpha_prev[1:] = 1.0 / alpha[:-1]
    beta = hankel_ratio_seq(L + 1, k * a_i)  # β_m = h_m/h_{m+1}
    n = np.arange(nmax + 1)[:, None]
    s = np.arange(-pad, pad + 1)[None, :]
    al = alpha[:, None]
    ial = inv_alpha_prev[:, None]
    valid_s = np.abs(s) <= n

    def trim(X, level):
        return np.where(valid_s & (n <= nmax - level), X, 0.0)

    orders = range(-L, L + 1) if orders is None else [int(m) for m in orders]
    top = max((abs(m) for m in orders), default=0)
    seed = _seed_column(offset, k, a_i, a_j, nmax, pad)
    # sectorial layers Ψ_{n,|m|}^{s,m}
    sect = {0: seed}
    pos, neg = seed, seed
    for m in range(top):
        den = _b_coef(m + 1, -m - 1)
        bm = beta[m]
        c1 = _b_coef(n, -s) * bm * ial
        c2 = _b_coef(n + 1, s - 1) * al * bm
        pos = trim((c1 * _shift(pos, -1, -1) - c2 * _shift(pos, 1, -1)) / den, m + 1)
        c1 = _b_coef(n, s) * bm * ial
        c2 = _b_coef(n + 1, -s - 1) * al * bm
        neg = trim((c1 * _shift(neg, -1, 1) - c2 * _shift(neg, 1, 1)) / den, m + 1)
        sect[m + 1] = pos
        sect[-(m + 1)] = neg
    rn, rs, s_of_row = _row_index(L, pad)
    row_sign = _conv_sign(s_of_row)
    an_s = _a_coef(n, s) * al
    anm1_s = _a_coef(n - 1, s) * ial
    bufs = [np.zeros_like(seed) for _ in range(3)]
    result = {}
    for m in orders:
        am = abs(m)
        cols = np.empty((L + 1 - am, rn.size), dtype=complex)
        prev, cur, nxt = bufs
        cur[...] = sect[m]
        cols[0] = cur[rn, rs]
        for l in range(am, L):
            # level l is valid for n <= nmax - l, and each step reads only
            # inside that window, so stale data outside it is never used;
            # this step does not couple orders s, so |s| <= L suffices
            w = nmax - l
            sw = min(w, L)
            win = (slice(0, w + 1), slice(pad - sw, pad + sw + 1))
            c = cur[win]
            acc = np.zeros_like(c)
            acc[:-1] -= an_s[win][:-1] * c[1:]
            acc[1:] += anm1_s[win][1:] * c[:-1]
            acc *= beta[l]
            if l > am:
                acc += _a_coef(l - 1, m) * beta[l - 1] * beta[l] * prev[win]
            acc /= _a_coef(l, m)
            acc[-1] = 0.0
            nxt[win] = acc
            prev, cur, nxt = cur, nxt, prev
            cols[l + 1 - am] = cur[rn, rs]
        block = cols.T * (row_sign[:, None] * _conv_sign(m))
        if not np.all(np.isfinite(block)):
            raise PoleError("translation recurrence produced non-finite values")
        result[m] = block
    return result


def translation_coefficients(offset, k: float, a_i: float, a_j: float, L: int) -> np.ndarray:
    """Dense Ψ block with rows ``(n, s)`` and columns ``(l, m)``, ``n, l <= L``."""
    cols = translation_columns(offset, k, a_i, a_j, L)
    nb = (L + 1) ** 2
    out = np.empty((nb, nb), dtype=complex)
    for m, block in cols.items():
        idx = [lm_index(l, m) for l in range(abs(m), L + 1)]
        out[:, idx] = block
    return out


def translation_table(sset: ScattererSet, pair: tuple[int, int], k: float, L: int) -> TranslationTable:
    """Ψ(b_ij) for ``pair = (i, j)``: maps ``ψ(r_i)`` onto sphere ``j``."""
    i, j = pair
    if i == j:
        raise DomainError("pair must join two different scatterers")
    data = translation_coefficients(sset.offset(i, j), k, sset.radii[i], sset.radii[j], L)
    data.setflags(write=False)
    return TranslationTable((int(i), int(j)), int(L), data)


# ---------------------------------------------------------------------------
# block system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiSolution:
    scatterers: ScattererSet
    k: float
    L: int
    A: np.ndarray  # (M, (L+1)^2)
    G: np.ndarray  # (M, (L+1)^2)
    system_residual: float

    def coeffs(self, i: int) -> SphCoeffs:
        return flat_to_coeffs(self.A[i], self.L)


def coeffs_to_flat(c: SphCoeffs, L: int | None = None) -> np.ndarray:
    L = c.L if L is None else L
    out = np.zeros((L + 1) ** 2, dtype=complex)
    for l in range(min(L, c.L) + 1):
        out[l * l : (l + 1) ** 2] = c.a[l, c.L - l : c.L + l + 1]
    return out


def flat_to_coeffs(v: np.ndarray, L: int) -> SphCoeffs:
    c = SphCoeffs.zeros(L)
    for l in range(L + 1):
        c.a[l, L - l : L + l + 1] = v[l * l : (l + 1) ** 2]
    return c


def assemble_system(sset: ScattererSet, k: float, L: int) -> np.ndarray:
    """Block matrix with identity diagonal; block ``(j, i)`` is Ψ(b_ij)."""
    nb = (L + 1) ** 2
    M = sset.M
    A = np.eye(M * nb, dtype=complex)
    for i in range(M):
        for j in range(M):
            if i != j:
                T = translation_table(sset, (i, j), k, L)
                A[j * nb : (j + 1) * nb, i * nb : (i + 1) * nb] = T.data
    return A


def solve_from_coeffs(sset: ScattererSet, k: float, L: int, G: np.ndarray) -> MultiSolution:
    """Solve for ``A`` given flat boundary coefficients ``G`` of shape ``(M, (L+1)^2)``."""
    nb = (L + 1) ** 2
    G = np.asarray(G, dtype=complex)
    if G.shape != (sset.M, nb):
        raise DimensionError(f"G has shape {G.shape}, expected {(sset.M, nb)}")
    K = assemble_system(sset, k, L)
    g = G.ravel()
    lu, piv = scipy.linalg.lu_factor(K)
    x = scipy.linalg.lu_solve((lu, piv), g)
    if not np.all(np.isfinite(x)):
        raise np.linalg.LinAlgError("block system is singular")
    res = float(np.max(np.abs(K @ x - g)) / max(np.max(np.abs(g)), 1e-300))
    return MultiSolution(sset, float(k), int(L), x.reshape(sset.M, nb), G, res)


def assemble_and_solve(sset: ScattererSet, k: float, L: int, boundary: list[NodalScalarField]) -> MultiSolution:
    """Transform the boundary data on each sphere and solve the coupled system."""
    if len(boundary) != sset.M:
        raise DimensionError("one boundary field per scatterer is required")
    G = np.stack([coeffs_to_flat(sph_forward(f, L)) for f in boundary])
    return solve_from_coeffs(sset, k, L, G)


def eval_scatterer_field(sol: MultiSolution, i: int, points) -> np.ndarray:
    """``U^i_L`` at Cartesian points outside sphere ``i``."""
    sset = sol.scatterers
    r, th, ph = sset.local(i, points)
    if np.any(r < sset.radii[i] * (1 - 1e-12)):
        raise DomainError(f"point inside scatterer {i}")
    r = np.maximum(r, sset.radii[i])
    ctx = make_context(sol.k, sset.radii[i], sol.L)
    R = ratio_table(ctx, r, sol.L)
    return sph_synthesize(sol.coeffs(i), th, ph, radial=R)


def eval_total_field(sol: MultiSolution, points) -> np.ndarray:
    """``Σ_i U^i_L`` at Cartesian points ``(..., 3)`` outside every scatterer."""
    pts = np.asarray(points, dtype=float)
    return sum(eval_scatterer_field(sol, i, pts) for i in range(sol.scatterers.M))


def sphere_points(sset: ScattererSet, i: int, count: int, seed: int = 0):
    """Pseudo-random points on sphere ``i``: ``(Cartesian, θ, φ)``."""
    rng = np.random.default_rng(seed)
    th = np.arccos(rng.uniform(-1.0, 1.0, count))
    ph = rng.uniform(0.0, 2.0 * np.pi, count)
    d = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    return sset.centers[i] + sset.radii[i] * d, th, ph


def boundary_residual(sol: MultiSolution, boundary: list[NodalScalarField], count: int = 400, seed: int = 0) -> np.ndarray:
    """Sup norm of ``Σ_j U^j_L - g_N`` at off-grid points on each sphere."""
    out = np.empty(sol.scatterers.M)
    for i, f in enumerate(boundary):
        pts, th, ph = sphere_points(sol.scatterers, i, count, seed + i)
        u = eval_total_field(sol, pts)
        out[i] = np.max(np.abs(u - eval_nodal_field(f, th, ph)))
    return out
