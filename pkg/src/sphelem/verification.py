"""Oracle cross-checks between the fast paths and the brute-force references.

Each check returns a :class:`CheckResult` with the worst observed delta and
its tolerance.  ``perturb`` scales every production value by ``1 + perturb``
so the harness can be shown to fail when the library is wrong.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import spherical_jn, spherical_yn

from . import oracle
from .fields import funk_hecke_coeffs, on_sphere, plane_wave
from .grid import build_uniform_partition, sample_scalar
from .multiscatter import lm_index, translation_columns, translation_coefficients
from .radial import make_context, ratio_table
from .scatter import dtn_apply
from .specfun import trig_form
from .sphtrans import SphCoeffs, sph_forward

# reference Re Ψ_{90,90}^{s,0}(b) for k=90, b=(0.5,0,0), a_i=a_j=0.15
TRANSLATION_REFERENCE = {0: 7.78972e-43, 2: -7.70172e-43, 4: 7.44350e-43}


@dataclass(frozen=True)
class CheckResult:
    name: str
    delta: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.delta) and self.delta <= self.tol)

    def asdict(self) -> dict:
        return {"name": self.name, "delta": self.delta, "tol": self.tol, "passed": self.passed}


def check_gaunt_quadrature(perturb: float = 0.0) -> CheckResult:
    """Gaunt coefficients against a tensor Gauss/trapezoid surface rule."""
    x, w = np.polynomial.legendre.leggauss(40)
    th = np.arccos(x)
    ph = 2.0 * np.pi * np.arange(80) / 80
    T, P = np.meshgrid(th, ph, indexing="ij")
    W = w[:, None] * (2.0 * np.pi / 80)
    worst = 0.0
    for l, m, q, mu, n in [(2, 1, 2, -1, 2), (3, -2, 2, 1, 3), (4, 3, 3, -1, 5), (5, -3, 4, 4, 3)]:
        ref = np.sum(W * oracle.ylm(l, m, T, P) * oracle.ylm(q, mu, T, P) * np.conj(oracle.ylm(n, m + mu, T, P)))
        worst = max(worst, abs(oracle.gaunt(l, m, q, mu, n) * (1 + perturb) - ref.real))
    return CheckResult("gaunt vs surface quadrature", worst, 1e-13)


def check_quadrature_vs_transform(seed: int = 0, perturb: float = 0.0) -> CheckResult:
    """Fast SPH transform against direct per-element quadrature, l <= 10."""
    rng = np.random.default_rng(seed)
    part = build_uniform_partition(3, 4, 12)
    d = rng.normal(size=3)
    fn = on_sphere(plane_wave(3.0 + 2.0 * rng.random(), d))
    field = sample_scalar(fn, part)
    c = sph_forward(field, 10)
    worst = 0.0
    for l in range(0, 11, 2):
        for m in (-l, 0, l // 2, l):
            ref = oracle.quad_sph_coeff(field, l, m)
            worst = max(worst, abs(c(l, m) * (1 + perturb) - ref))
    return CheckResult("sph_forward vs element quadrature", worst, 1e-12)


def check_trig_form(perturb: float = 0.0) -> CheckResult:
    """Closed-form trig coefficients against DFT extraction, (l, m) = (40, 17)."""
    tf = trig_form(40, 17)
    ref = oracle.trig_form_dft(40, 17)
    got = np.zeros(41)
    got[tf.freqs] = tf.coeffs * (1 + perturb)
    return CheckResult("trig form (40,17) vs DFT", float(np.max(np.abs(got - ref))), 1e-13)


def check_translation_oracle(seed: int = 0, perturb: float = 0.0, geometries: int = 3) -> CheckResult:
    """Recurrence-built Ψ against the Gaunt series for n, l <= 4."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    L = 4
    for g in range(geometries):
        if g == 0:
            b, k, a = np.array([0.3, 0.2, 0.6]), 5.0, 0.1
        else:
            b = rng.normal(size=3)
            b *= rng.uniform(0.5, 1.5) / np.linalg.norm(b)
            k, a = rng.uniform(2.0, 12.0), rng.uniform(0.05, 0.2)
        T = translation_coefficients(b, k, a, a, L) * (1 + perturb)
        scale = np.max(np.abs(T))
        for n in range(L + 1):
            for l in range(L + 1):
                for s in range(-n, n + 1):
                    for m in range(-l, l + 1):
                        ref = oracle.normalized_translation_direct(b, k, a, a, n, l, s, m)
                        if abs(ref) > 1e-12 * scale:
                            v = T[lm_index(n, s), lm_index(l, m)]
                            worst = max(worst, abs(v - ref) / abs(ref))
    return CheckResult("translation recurrence vs Gaunt series", worst, 1e-10)


def translation_reference_values() -> dict:
    """Recurrence values Re Ψ_{90,90}^{s,0} at the reference configuration."""
    cols = translation_columns([0.5, 0.0, 0.0], 90.0, 0.15, 0.15, 90, orders=[0])[0]
    return {s: cols[lm_index(90, s), 90] for s in range(0, 5)}


def check_translation_table(perturb: float = 0.0) -> CheckResult:
    vals = translation_reference_values()
    worst = max(
        abs(vals[s].real * (1 + perturb) - ref) / abs(ref) for s, ref in TRANSLATION_REFERENCE.items()
    )
    return CheckResult("translation k=90 order 90 vs reference", worst, 1e-3)


def check_radial_ratios(perturb: float = 0.0) -> CheckResult:
    """Outgoing ratios against direct Hankel quotients, l <= 20."""
    worst = 0.0
    for k, b in ((10.0, 1.0), (40.0, 0.25), (3.0, 0.5)):
        ctx = make_context(k, b, 20)
        r = b * np.array([1.0, 1.3, 2.0, 7.5, 30.0])
        R = ratio_table(ctx, r, 20) * (1 + perturb)
        l = np.arange(21)[:, None]
        h = lambda z: spherical_jn(l, z) + 1j * spherical_yn(l, z)
        ref = h(k * r[None, :]) / h(k * b)
        worst = max(worst, float(np.max(np.abs(R - ref) / np.abs(ref))))
    return CheckResult("radial ratio vs Hankel quotient", worst, 1e-12)


def check_dtn(perturb: float = 0.0) -> CheckResult:
    """DtN multiplier at l = 10, k = 30, b = 0.4."""
    k, b, l = 30.0, 0.4, 10
    c = SphCoeffs.zeros(l)
    c.a[l, l] = 1.0
    got = dtn_apply(c, k, b).a[l, l] * (1 + perturb)
    z = k * b
    ref = -k * (spherical_jn(l, z, True) + 1j * spherical_yn(l, z, True)) / (spherical_jn(l, z) + 1j * spherical_yn(l, z))
    return CheckResult("DtN multiplier l=10", abs(got - ref) / abs(ref), 1e-12)


def check_funk_hecke(perturb: float = 0.0) -> CheckResult:
    """Quadrature oracle at (20, 13) against the plane-wave expansion, k=10."""
    part = build_uniform_partition(3, 4, 30)
    d = [0.3, -0.5, 0.8]
    field = sample_scalar(on_sphere(plane_wave(10.0, d)), part)
    ref = funk_hecke_coeffs(10.0, 1.0, d, 20)(20, 13)
    got = oracle.quad_sph_coeff(field, 20, 13) * (1 + perturb)
    return CheckResult("element quadrature (20,13) vs plane-wave expansion", abs(got - ref), 1e-12)


def run_checks(seed: int = 0, perturb: float = 0.0) -> list[CheckResult]:
    return [
        check_gaunt_quadrature(perturb),
        check_quadrature_vs_transform(seed, perturb),
        check_trig_form(perturb),
        check_funk_hecke(perturb),
        check_translation_oracle(seed, perturb),
        check_translation_table(perturb),
        check_radial_ratios(perturb),
        check_dtn(perturb),
    ]


__all__ = ["CheckResult", "TRANSLATION_REFERENCE", "run_checks", "translation_reference_values"]
