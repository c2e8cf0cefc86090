"""Tensor θ-φ partitions of the sphere and nodal fields on them.

Each element is a rectangle ``[θ_{s-1}, θ_s] x [φ_{t-1}, φ_t]`` mapped
affinely from the reference square::

    θ = θ̂ η + α,   φ = φ̂ ξ + β,   (ξ, η) ∈ [-1, 1]^2.

Nodal values on an element are stored as ``values[e, i, j]`` where ``i``
indexes the φ direction (ξ_i) and ``j`` the θ direction (η_j), both at
Legendre-Gauss-Lobatto points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .specfun import LegendreCoeffTable, lgl_basis_table


class PartitionError(ValueError):
    """Invalid breakpoints for a partition."""


@dataclass(frozen=True)
class Element:
    theta_interval: tuple[float, float]
    phi_interval: tuple[float, float]

    @property
    def theta_half(self) -> float:
        return 0.5 * (self.theta_interval[1] - self.theta_interval[0])

    @property
    def theta_mid(self) -> float:
        return 0.5 * (self.theta_interval[1] + self.theta_interval[0])

    @property
    def phi_half(self) -> float:
        return 0.5 * (self.phi_interval[1] - self.phi_interval[0])

    @property
    def phi_mid(self) -> float:
        return 0.5 * (self.phi_interval[1] + self.phi_interval[0])

    def map(self, xi, eta):
        """Reference ``(ξ, η)`` to ``(θ, φ)``."""
        return (
            self.theta_half * np.asarray(eta) + self.theta_mid,
            self.phi_half * np.asarray(xi) + self.phi_mid,
        )

    def inverse_map(self, theta, phi):
        """``(θ, φ)`` to reference ``(ξ, η)``."""
        return (
            (np.asarray(phi) - self.phi_mid) / self.phi_half,
            (np.asarray(theta) - self.theta_mid) / self.theta_half,
        )


@dataclass(frozen=True)
class SphPartition:
    """Tensor partition; elements ordered with the θ index outermost."""

    theta_breaks: tuple[float, ...]
    phi_breaks: tuple[float, ...]
    N: int
    elements: tuple[Element, ...] = field(init=False, repr=False)

    def __post_init__(self):
        els = []
        tb, pb = self.theta_breaks, self.phi_breaks
        for s in range(len(tb) - 1):
            for t in range(len(pb) - 1):
                els.append(Element((tb[s], tb[s + 1]), (pb[t], pb[t + 1])))
        object.__setattr__(self, "elements", tuple(els))

    @property
    def n_theta(self) -> int:
        return len(self.theta_breaks) - 1

    @property
    def n_phi(self) -> int:
        return len(self.phi_breaks) - 1

    @cached_property
    def basis(self) -> LegendreCoeffTable:
        return lgl_basis_table(self.N)

    def node_angles(self):
        """Arrays ``(θ, φ)`` of shape ``(E, N+1, N+1)`` indexed ``[e, i, j]``."""
        x = self.basis.nodes
        th = np.empty((len(self.elements), self.N + 1, self.N + 1))
        ph = np.empty_like(th)
        for e, el in enumerate(self.elements):
            t, p = el.map(x[:, None], x[None, :])
            th[e] = t
            ph[e] = p
        return th, ph

    def locate(self, theta, phi):
        """Element index containing each point (φ wrapped into [0, 2π))."""
        theta = np.asarray(theta, dtype=float)
        phi = np.mod(np.asarray(phi, dtype=float), 2.0 * math.pi)
        s = np.searchsorted(self.theta_breaks, theta, side="right") - 1
        t = np.searchsorted(self.phi_breaks, phi, side="right") - 1
        s = np.clip(s, 0, self.n_theta - 1)
        t = np.clip(t, 0, self.n_phi - 1)
        return s * self.n_phi + t, phi


def _check_breaks(b, lo, hi, name):
    b = [float(x) for x in b]
    if len(b) < 2:
        raise PartitionError(f"{name} needs at least two breakpoints")
    if any(y <= x for x, y in zip(b, b[1:])):
        raise PartitionError(f"{name} must be strictly increasing")
    if abs(b[0] - lo) > 1e-14 or abs(b[-1] - hi) > 1e-12:
        raise PartitionError(f"{name} must span [{lo}, {hi}]")
    b[0], b[-1] = lo, hi
    return tuple(b)


def build_custom_partition(theta_breaks, phi_breaks, N: int) -> SphPartition:
    """Tensor partition from explicit breakpoints."""
    if N < 1:
        raise PartitionError("N must be >= 1")
    tb = _check_breaks(theta_breaks, 0.0, math.pi, "theta_breaks")
    pb = _check_breaks(phi_breaks, 0.0, 2.0 * math.pi, "phi_breaks")
    return SphPartition(tb, pb, int(N))


def build_uniform_partition(n_theta: int, m_phi: int, N: int) -> SphPartition:
    """Equispaced ``n_theta x m_phi`` partition."""
    if n_theta < 1 or m_phi < 1:
        raise PartitionError("element counts must be >= 1")
    tb = [s * math.pi / n_theta for s in range(n_theta + 1)]
    pb = [2.0 * t * math.pi / m_phi for t in range(m_phi + 1)]
    return build_custom_partition(tb, pb, N)


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NodalScalarField:
    partition: SphPartition
    values: np.ndarray  # (E, N+1, N+1) complex, [e, i(φ), j(θ)]

    def __post_init__(self):
        N = self.partition.N
        shape = (len(self.partition.elements), N + 1, N + 1)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} != {shape}")


@dataclass(frozen=True)
class NodalVectorField:
    """Spherical components ``(U, V, W)`` along ``(e_r, e_θ, e_φ)``."""

    U: NodalScalarField
    V: NodalScalarField
    W: NodalScalarField

    @property
    def partition(self) -> SphPartition:
        return self.U.partition


def sph_basis(theta, phi) -> np.ndarray:
    """Rows ``e_r, e_θ, e_φ`` in Cartesian components; shape ``(..., 3, 3)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    z = np.zeros_like(st * sp)
    er = np.stack([st * cp, st * sp, ct + z], axis=-1)
    et = np.stack([ct * cp, ct * sp, -st + z], axis=-1)
    ep = np.stack([-sp + z, cp + z, z], axis=-1)
    return np.stack([er, et, ep], axis=-2)


def cart_to_sph(vec, theta, phi) -> np.ndarray:
    """Cartesian ``(..., 3)`` components to ``(v_r, v_θ, v_φ)``."""
    T = sph_basis(theta, phi)
    return np.einsum("...ab,...b->...a", T, vec)


def sph_to_cart(vec, theta, phi) -> np.ndarray:
    """``(v_r, v_θ, v_φ)`` to Cartesian components."""
    T = sph_basis(theta, phi)
    return np.einsum("...ba,...b->...a", T, vec)


def sample_scalar(f, partition: SphPartition) -> NodalScalarField:
    """Evaluate ``f(θ, φ)`` (vectorized) at every mapped LGL node."""
    th, ph = partition.node_angles()
    vals = np.asarray(f(th, ph), dtype=complex)
    vals = np.broadcast_to(vals, th.shape).copy()
    return NodalScalarField(partition, vals)


def sample_vector_cartesian(F, partition: SphPartition) -> NodalVectorField:
    """Sample a Cartesian vector function ``F(θ, φ) -> (..., 3)`` and store
    its spherical components."""
    th, ph = partition.node_angles()
    vec = np.asarray(F(th, ph), dtype=complex)
    vec = np.broadcast_to(vec, th.shape + (3,))
    sph = cart_to_sph(vec, th, ph)
    return NodalVectorField(
        NodalScalarField(partition, sph[..., 0].copy()),
        NodalScalarField(partition, sph[..., 1].copy()),
        NodalScalarField(partition, sph[..., 2].copy()),
    )


def sample_vector_spherical(F, partition: SphPartition) -> NodalVectorField:
    """Sample ``F(θ, φ) -> (..., 3)`` already in spherical components."""
    th, ph = partition.node_angles()
    vec = np.broadcast_to(np.asarray(F(th, ph), dtype=complex), th.shape + (3,))
    return NodalVectorField(
        *(NodalScalarField(partition, vec[..., c].copy()) for c in range(3))
    )


def barycentric_weights(x: np.ndarray) -> np.ndarray:
    """Barycentric weights for nodes ``x``, normalized to max magnitude 1."""
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    # log-sum to avoid overflow for large N
    logw = -np.sum(np.log(np.abs(d)), axis=1)
    sign = np.prod(np.sign(d), axis=1)
    return sign * np.exp(logw - logw.max())


def lagrange_matrix(x: np.ndarray, w: np.ndarray, t) -> np.ndarray:
    """Values ``l_i(t)`` of the Lagrange basis; shape ``t.shape + (len(x),)``."""
    t = np.asarray(t, dtype=float)
    diff = t[..., None] - x
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = w / diff
        out = terms / terms.sum(axis=-1, keepdims=True)
    hit = exact.any(axis=-1)
    if np.any(hit):
        out[hit] = exact[hit].astype(float)
    return out


def eval_nodal_field(field: NodalScalarField, theta, phi):
    """Evaluate the piecewise tensor Lagrange interpolant at ``(θ, φ)``."""
    part = field.partition
    x = part.basis.nodes
    w = barycentric_weights(np.asarray(x))
    theta = np.asarray(theta, dtype=float)
    e, phi_w = part.locate(theta, np.asarray(phi, dtype=float))
    scalar = theta.ndim == 0
    theta, phi_w, e = np.atleast_1d(theta), np.atleast_1d(phi_w), np.atleast_1d(e)
    out = np.empty(theta.shape, dtype=complex)
    for idx in np.unique(e):
        sel = e == idx
        el = part.elements[idx]
        xi, eta = el.inverse_map(theta[sel], phi_w[sel])
        Lx = lagrange_matrix(x, w, np.clip(xi, -1.0, 1.0))
        Le = lagrange_matrix(x, w, np.clip(eta, -1.0, 1.0))
        out[sel] = np.einsum("pi,ij,pj->p", Lx, field.values[idx], Le)
    return out[0] if scalar else out
