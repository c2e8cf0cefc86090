"""Special functions: normalized associated Legendre functions and their
trigonometric forms, spherical Bessel functions, and overflow-free
Hankel ratio recurrences.

Convention
----------
For ``0 <= m <= l`` the normalized Legendre function is

    P̂_l^m(x) = c_l^m (1 - x^2)^{m/2} d^m/dx^m P_l(x),
    c_l^m = sqrt((2l+1)/(4π) (l-m)!/(l+m)!),

so ``Y_l^m(θ, φ) = P̂_l^m(cos θ) e^{imφ}`` and ``P̂_l^{-m} = (-1)^m P̂_l^m``.
There is no Condon-Shortley phase on non-negative orders.  This is the
convention under which the derivative and ``1/sin θ`` recurrences below hold
as written, and under which ``Y_l^{-m} = (-1)^m conj(Y_l^m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np
from scipy.special import gammaln


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class PoleError(ArithmeticError):
    """A ratio hit an (exact or numerically indistinguishable) pole."""


# ---------------------------------------------------------------------------
# Associated Legendre functions
# ---------------------------------------------------------------------------


def normalized_assoc_legendre(l: int, m: int, x):
    """Evaluate P̂_l^m(x) by the increasing-degree three-term recurrence.

    Accepts scalar or array ``x``.  Negative orders use
    ``P̂_l^{-m} = (-1)^m P̂_l^m``.
    """
    if l < 0 or abs(m) > l:
        raise DomainError(f"need |m| <= l, got l={l}, m={m}")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0):
        raise DomainError("|x| must be <= 1")
    sign = -1.0 if (m < 0 and m % 2) else 1.0
    m = abs(m)
    s = np.sqrt(np.clip(1.0 - xa * xa, 0.0, None))
    pmm = np.full_like(xa, 1.0 / math.sqrt(4.0 * math.pi))
    for k in range(1, m + 1):
        pmm = pmm * math.sqrt((2.0 * k + 1.0) / (2.0 * k)) * s
    if l == m:
        out = pmm
    else:
        p_prev = pmm
        p_cur = math.sqrt(2.0 * m + 3.0) * xa * pmm
        for ll in range(m + 2, l + 1):
            a = math.sqrt((4.0 * ll * ll - 1.0) / (ll * ll - m * m))
            b = math.sqrt(((ll - 1.0) ** 2 - m * m) / (4.0 * (ll - 1.0) ** 2 - 1.0))
            p_prev, p_cur = p_cur, a * (xa * p_cur - b * p_prev)
        out = p_cur
    out = sign * out
    return float(out) if np.ndim(x) == 0 else out


def legendre_table(lmax: int, x) -> np.ndarray:
    """All P̂_l^m(x) for ``0 <= m <= l <= lmax``.

    Returns an array of shape ``(lmax + 1, lmax + 1) + x.shape`` indexed
    ``[l, m]``; entries with ``m > l`` are zero.
    """
    xa = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - xa * xa, 0.0, None))
    out = np.zeros((lmax + 1, lmax + 1) + xa.shape)
    pmm = np.full_like(xa, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(lmax + 1):
        if m > 0:
            pmm = pmm * math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s
        out[m, m] = pmm
        if m + 1 <= lmax:
            out[m + 1, m] = math.sqrt(2.0 * m + 3.0) * xa * pmm
        for ll in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * ll * ll - 1.0) / (ll * ll - m * m))
            b = math.sqrt(((ll - 1.0) ** 2 - m * m) / (4.0 * (ll - 1.0) ** 2 - 1.0))
            out[ll, m] = a * (xa * out[ll - 1, m] - b * out[ll - 2, m])
    return out


def sph_harm(l: int, m: int, theta, phi):
    """Y_l^m(θ, φ) in the module convention."""
    return normalized_assoc_legendre(l, m, np.cos(theta)) * np.exp(1j * m * np.asarray(phi))


# ---------------------------------------------------------------------------
# Trigonometric forms
# ---------------------------------------------------------------------------

_PARITY = {
    (0, 0): "even-even",
    (0, 1): "even-odd",
    (1, 0): "odd-even",
    (1, 1): "odd-odd",
}


@dataclass(frozen=True)
class TrigForm:
    """Cosine/sine series of ``θ -> P̂_l^m(cos θ)``.

    ``coeffs[i]`` multiplies ``trig(freqs[i] θ)`` where ``trig`` is cos for
    even ``m`` and sin for odd ``m``; ``freqs`` is ``2k`` (``l`` even) or
    ``2k - 1`` (``l`` odd) for ``k = k_min .. k_max``.
    """

    l: int
    m: int
    coeffs: np.ndarray

    @property
    def parity_class(self) -> str:
        return _PARITY[(self.l % 2, self.m % 2)]

    @property
    def kind(self) -> str:
        return "sin" if self.m % 2 else "cos"

    @property
    def k_min(self) -> int:
        return 0 if (self.l % 2 == 0 and self.m % 2 == 0) else 1

    @property
    def k_max(self) -> int:
        return self.l // 2 if self.l % 2 == 0 else (self.l + 1) // 2

    @property
    def freqs(self) -> np.ndarray:
        k = np.arange(self.k_min, self.k_max + 1)
        return 2 * k if self.l % 2 == 0 else 2 * k - 1

    def __call__(self, theta):
        """Synthesize the series at ``theta``."""
        th = np.asarray(theta, dtype=float)
        arg = np.multiply.outer(th, self.freqs)
        basis = np.sin(arg) if self.m % 2 else np.cos(arg)
        return basis @ self.coeffs


def _log_dlm(l: int, m):
    """log of the leading coefficient magnitude d_lm (log-gamma form)."""
    m = np.asarray(m, dtype=float)
    return (
        gammaln(l + 0.5)
        - math.log(math.pi)
        + 0.5 * (math.log(2 * l + 1) - gammaln(l - m + 1) - gammaln(l + m + 1))
    )


def _trig_rows(l: int) -> np.ndarray:
    """Trig-form coefficients for all orders ``0..l`` at fixed degree.

    Returns ``(l + 1, l//2 + 1)`` for even ``l`` (columns k = 0..l/2) and
    ``(l + 1, (l+1)//2)`` for odd ``l`` (columns k = 1..(l+1)/2).  For even
    ``l`` and odd ``m`` column 0 is zero (sine series starts at k = 1).
    The backward recurrence is run for all ``m`` at once since its
    coefficients depend on ``m`` only through ``m^2``.
    """
    if l == 0:
        return np.array([[0.5 / math.sqrt(math.pi)]])
    m = np.arange(l + 1, dtype=float)
    mi = np.arange(l + 1)
    w = float(l * (l + 1))
    # non-negative orders carry no Condon-Shortley phase: leading sign is
    # (-1)^floor(m/2) rather than (-1)^ceil(m/2)
    lead = np.where((mi // 2) % 2 == 0, 1.0, -1.0) * np.exp(_log_dlm(l, m))
    if l % 2 == 0:
        kmax = l // 2
        A = np.zeros((l + 1, kmax + 2))  # extra zero column at kmax + 1
        A[:, kmax] = lead
        for k in range(kmax + 1, 2, -1):
            den = 2.0 * (k - 2) * (2 * k - 3) - w
            ak = 2.0 * (2.0 * m * m - w + 4.0 * (k - 1) ** 2) / den
            bk = (w - 2.0 * k * (2 * k - 1)) / den
            A[:, k - 2] = ak * A[:, k - 1] + bk * A[:, k]
        if l == 2:
            A[:, 0] = (w - 2.0) / (2.0 * w - 4.0 * m * m) * A[:, 1]
        else:
            den = -w
            a2 = 2.0 * (2.0 * m * m - w + 4.0) / den
            b2 = (w - 4.0 * 3.0) / den
            A[:, 0] = 0.5 * (a2 * A[:, 1] + b2 * A[:, 2])
        A[1::2, 0] = 0.0
        return A[:, : kmax + 1]
    kmax = (l + 1) // 2
    A = np.zeros((l + 1, kmax + 2))  # columns indexed directly by k
    A[:, kmax] = lead
    for k in range(kmax + 1, 2, -1):
        den = (2.0 * k - 5) * (2.0 * k - 4) - w
        ak = 2.0 * (2.0 * m * m - w + (2.0 * k - 3) ** 2) / den
        bk = (w - 2.0 * (k - 1) * (2 * k - 1)) / den
        A[:, k - 2] = ak * A[:, k - 1] + bk * A[:, k]
    return A[:, 1 : kmax + 1]


def trig_form(l: int, m: int) -> TrigForm:
    """Trig-form coefficients of P̂_l^m(cos θ) for ``0 <= m <= l``."""
    if l < 0 or m < 0 or m > l:
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    row = _trig_rows(l)[m]
    if l % 2 == 0 and m % 2 == 1:
        row = row[1:]
    return TrigForm(l, m, np.array(row))


def trig_table(lmax: int) -> tuple:
    """Per-degree trig-form rows for ``l = 0..lmax`` (tuple of arrays).

    Arrays are marked read-only so the table can be shared freely.
    """
    rows = []
    for l in range(lmax + 1):
        r = _trig_rows(l)
        r.setflags(write=False)
        rows.append(r)
    return tuple(rows)


# ---------------------------------------------------------------------------
# Derivative and 1/sin recurrences
# ---------------------------------------------------------------------------


def dtheta_assoc_legendre_weights(l: int, m: int) -> list[tuple[int, float]]:
    """Terms ``(order, weight)`` with d/dθ P̂_l^m(cos θ) = Σ weight P̂_l^order."""
    if l < 1:
        raise DomainError("derivative of P̂_0^0 is identically zero")
    if m < 0 or m > l:
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    if m == 0:
        return [(1, -math.sqrt(l * (l + 1.0)))]
    if m == l:
        return [(l - 1, math.sqrt(l / 2.0))]
    c1 = 0.5 * math.sqrt((l + m) * (l - m + 1.0))
    c2 = 0.5 * math.sqrt((l + m + 1.0) * (l - m))
    return [(m - 1, c1), (m + 1, -c2)]


def assoc_legendre_over_sin_weights(l: int, m: int) -> list[tuple[int, float]]:
    """Terms ``(order, weight)`` at degree ``l + 1`` with
    P̂_l^m(cos θ)/sin θ = Σ weight P̂_{l+1}^order(cos θ).  Valid for m >= 1.
    """
    if m < 1 or m > l:
        raise DomainError(f"need 1 <= m <= l, got l={l}, m={m}")
    q = (2.0 * l + 1.0) / (2.0 * l + 3.0)
    c1 = math.sqrt(q * (l - m + 1.0) * (l - m + 2.0))
    c2 = math.sqrt(q * (l + m + 1.0) * (l + m + 2.0))
    return [(m - 1, c1 / (2.0 * m)), (m + 1, c2 / (2.0 * m))]


# ---------------------------------------------------------------------------
# Spherical Bessel functions of the first kind
# ---------------------------------------------------------------------------

_RESCALE_EXP = 400  # rescale by an exact power of two to keep f^2 finite
_RESCALE = 2.0**_RESCALE_EXP


def _start_order(nmax: int, zmax: float) -> int:
    return int(math.ceil(max(nmax, zmax))) + 40 + int(math.ceil(8.0 * zmax ** (1.0 / 3.0)))


# below this the leading power-series term is exact in double precision
# (relative correction z²/6), and large backward steps (2n+1)/z would
# overflow the normalization sum
_TINY_Z = 1e-8


def _jn_log_series(nmax: int, z: np.ndarray) -> np.ndarray:
    """``log j_n(z) = n log z - log (2n+1)!!`` for tiny positive ``z``."""
    n = np.arange(nmax + 1).reshape((-1,) + (1,) * z.ndim)
    log_dfact = gammaln(2 * n + 2) - n * math.log(2.0) - gammaln(n + 1)
    return n * np.log(z) - log_dfact


def _jn_backward(nmax: int, z: np.ndarray):
    """Miller backward recurrence for j_0..j_nmax at positive ``z``.

    Returns ``(mant, shift, acc)`` with
    j_n(z) = mant[n] * 2**(-shift[n]) / sqrt(acc), after normalization by
    Σ (2n+1) j_n^2 = 1 and a sign fix from j_0 or j_1.  Shifts are exact
    integers so no rounding enters through the scale bookkeeping.
    """
    nstart = _start_order(nmax, float(z.max()))
    f_next = np.zeros_like(z)
    f = np.full_like(z, 1e-30)
    cnt = np.zeros(z.shape, dtype=np.int64)
    acc = (2 * nstart + 1) * f * f
    mant = np.zeros((nmax + 1,) + z.shape)
    cnts = np.zeros((nmax + 1,) + z.shape, dtype=np.int64)
    for n in range(nstart, 0, -1):
        f_prev = (2 * n + 1) / z * f - f_next
        f_next, f = f, f_prev
        acc = acc + (2 * n - 1) * f * f
        big = np.abs(f) > _RESCALE
        if np.any(big):
            f = np.where(big, np.ldexp(f, -_RESCALE_EXP), f)
            f_next = np.where(big, np.ldexp(f_next, -_RESCALE_EXP), f_next)
            acc = np.where(big, np.ldexp(acc, -2 * _RESCALE_EXP), acc)
            cnt = cnt + big
        if n - 1 <= nmax:
            mant[n - 1] = f
            cnts[n - 1] = cnt
    shift = (cnt[None] - cnts) * _RESCALE_EXP
    # sign from whichever of j_0, j_1 is larger in magnitude
    j0 = np.sin(z) / z
    j1 = np.sin(z) / z**2 - np.cos(z) / z
    use0 = np.abs(j0) >= np.abs(j1)
    ref_true = np.where(use0, j0, j1)
    if nmax >= 1:
        ref_comp = np.where(use0, mant[0], mant[1])
    else:
        # j_1 not stored; f_next holds the computed j_1 in current units
        ref_comp = np.where(use0, mant[0], f_next)
    flip = np.sign(ref_true) != np.sign(ref_comp)
    mant = np.where(flip, -mant, mant)
    return mant, shift, acc


def sph_bessel_j_table(nmax: int, z) -> np.ndarray:
    """j_n(z) for ``n = 0..nmax``; shape ``(nmax + 1,) + z.shape``.

    ``z`` must be real and non-negative.  Values below the double range
    underflow to zero.
    """
    za = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(za < 0):
        raise DomainError("z must be >= 0")
    out = np.zeros((nmax + 1,) + za.shape)
    tiny = (za > 0) & (za < _TINY_Z)
    pos = za >= _TINY_Z
    if np.any(pos):
        mant, shift, acc = _jn_backward(nmax, za[pos])
        with np.errstate(under="ignore"):
            out[:, pos] = np.ldexp(mant / np.sqrt(acc), -shift)
    if np.any(tiny):
        with np.errstate(under="ignore"):
            out[:, tiny] = np.exp(_jn_log_series(nmax, za[tiny]))
    out[0, ~pos] = 1.0
    if np.ndim(z) == 0:
        return out[:, 0]
    return out


def sph_bessel_j(n: int, z: float) -> float:
    """Spherical Bessel function j_n(z) for integer ``n >= 0`` and ``z >= 0``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    return float(sph_bessel_j_table(n, float(z))[n])


def sph_bessel_j_log(nmax: int, z: float):
    """``(log|j_n(z)|, sign j_n(z))`` for ``n = 0..nmax`` at ``z > 0``.

    Never underflows: the log magnitude is carried separately.
    """
    if z <= 0:
        raise DomainError("z must be > 0")
    if z < _TINY_Z:
        return _jn_log_series(nmax, np.array(float(z))), np.ones(nmax + 1)
    mant, shift, acc = _jn_backward(nmax, np.array([float(z)]))
    with np.errstate(divide="ignore"):
        logmag = (
            np.log(np.abs(mant[:, 0]))
            - shift[:, 0] * math.log(2.0)
            - 0.5 * math.log(acc[0])
        )
    return logmag, np.sign(mant[:, 0])


def sph_bessel_j_ratio_seq(nmax: int, z: float) -> np.ndarray:
    """α_n = j_n(z)/j_{n+1}(z) for ``n = 0..nmax`` via backward continued fraction.

    Raises PoleError if any j_{n+1}(z) is numerically zero relative to j_n(z).
    """
    if z <= 0:
        raise DomainError("z must be > 0")
    nstart = _start_order(nmax + 1, z)
    # r_n = j_{n+1}/j_n satisfies r_n = 1 / ((2n+3)/z - r_{n+1})
    r = 0.0
    out = np.empty(nmax + 1)
    for n in range(nstart, -1, -1):
        den = (2 * n + 3) / z - r
        if den == 0.0:
            # j_n itself vanishes; r_n is infinite and r_{n-1} = 0 next step
            r = math.inf
        else:
            r = 1.0 / den if math.isfinite(r) else 0.0
        if n <= nmax:
            out[n] = r
    with np.errstate(divide="ignore"):
        alpha = 1.0 / out
    bad = ~np.isfinite(alpha) | (np.abs(out) < 1e-300)
    if np.any(bad):
        n_bad = int(np.flatnonzero(bad)[0])
        raise PoleError(f"j_{n_bad + 1}({z}) vanishes; ratio α_{n_bad} is a pole")
    return alpha


def sph_bessel_j_ratio(n: int, z: float) -> float:
    """α_n(z) = j_n(z)/j_{n+1}(z)."""
    return float(sph_bessel_j_ratio_seq(n, z)[n])


# ---------------------------------------------------------------------------
# Spherical Hankel ratios (first kind)
# ---------------------------------------------------------------------------


def hankel_log_derivative(lmax: int, z) -> np.ndarray:
    """ρ_l(z) = h_l'(z)/h_l(z) for ``l = 0..lmax``.

    Forward recurrence ρ_l = z/(l - 1 - zρ_{l-1}) - (l+1)/z, which is stable.
    Vectorized over ``z``; output shape ``(lmax + 1,) + z.shape``.
    """
    za = np.asarray(z, dtype=float)
    if np.any(za <= 0):
        raise DomainError("z must be > 0")
    out = np.empty((lmax + 1,) + za.shape, dtype=complex)
    out[0] = -1.0 / za + 1j
    for l in range(1, lmax + 1):
        out[l] = za / (l - 1 - za * out[l - 1]) - (l + 1) / za
    return out


def hankel_ratio_seq(lmax: int, z) -> np.ndarray:
    """γ_m(z) = h_m(z)/h_{m+1}(z) for ``m = 0..lmax``.

    Forward recurrence 1/γ_m = (2m+1)/z - γ_{m-1}, seeded with γ_0 = iz/(z+i).
    """
    za = np.asarray(z, dtype=float)
    if np.any(za <= 0):
        raise DomainError("z must be > 0")
    out = np.empty((lmax + 1,) + za.shape, dtype=complex)
    out[0] = 1j * za / (za + 1j)
    for m in range(1, lmax + 1):
        out[m] = 1.0 / ((2 * m + 1) / za - out[m - 1])
    return out


def hankel_log(nmax: int, z: float) -> np.ndarray:
    """Complex logarithm of h_n(z), ``n = 0..nmax``, by ratio accumulation.

    Real part is log|h_n(z)|, imaginary part a (non-principal) phase.  Raw
    h_n values are never formed.
    """
    g = hankel_ratio_seq(max(nmax - 1, 0), z)
    out = np.empty(nmax + 1, dtype=complex)
    out[0] = np.log(-1j / z) + 1j * z
    if nmax >= 1:
        out[1:] = out[0] - np.cumsum(np.log(g[:nmax]))
    return out


# ---------------------------------------------------------------------------
# Legendre-Gauss-Lobatto basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LegendreCoeffTable:
    """LGL nodes/weights and Legendre coefficients of the Lagrange basis.

    ``v[i, n]`` is the coefficient of P_n in the Lagrange polynomial l_i.
    """

    N: int
    nodes: np.ndarray
    weights: np.ndarray
    v: np.ndarray


def legendre_vandermonde(nmax: int, x) -> np.ndarray:
    """P_n(x) for ``n = 0..nmax``; shape ``(nmax + 1,) + x.shape``."""
    xa = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + xa.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = xa
    for n in range(2, nmax + 1):
        out[n] = ((2 * n - 1) * xa * out[n - 1] - (n - 1) * out[n - 2]) / n
    return out


def lgl_basis_table(N: int) -> LegendreCoeffTable:
    """LGL nodes, weights and the Lagrange-to-Legendre coefficient matrix."""
    if N < 1:
        raise DomainError("N must be >= 1")
    # Newton on (1 - x^2) P_N'(x) via the Legendre-Vandermonde iteration,
    # started from Chebyshev-Gauss-Lobatto points
    x = -np.cos(np.pi * np.arange(N + 1) / N)
    for _ in range(100):
        P = legendre_vandermonde(N, x)
        x_old = x
        x = x_old - (x_old * P[N] - P[N - 1]) / ((N + 1) * P[N])
        if np.max(np.abs(x - x_old)) < 1e-16:
            break
    x = 0.5 * (x - x[::-1])  # enforce symmetry
    x[0], x[-1] = -1.0, 1.0
    P = legendre_vandermonde(N, x)
    w = 2.0 / (N * (N + 1) * P[N] ** 2)
    n = np.arange(N + 1)
    fac = (2 * n + 1).astype(float)
    fac[N] = N
    v = 0.5 * (w[:, None] * P.T) * fac[None, :]
    for arr in (x, w, v):
        arr.setflags(write=False)
    return LegendreCoeffTable(N, x, w, v)
