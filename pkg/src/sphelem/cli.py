"""Command-line driver: ``transform``, ``scatter-single``, ``scatter-multi``, ``verify``.

Every run reads one JSON config (unknown keys are rejected) and writes CSV
and JSON files into ``--out``.  Complex values are written as paired
``re``/``im`` columns.  Numerical libraries are imported after argument
parsing so ``--threads`` can take effect.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

MAX_DENSE_UNKNOWNS = 20000


class ConfigError(ValueError):
    """Malformed experiment configuration."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionSpec:
    n_theta: int | None = None
    m_phi: int | None = None
    theta_breaks: list[float] | None = None
    phi_breaks: list[float] | None = None


@dataclass(frozen=True)
class WaveSpec:
    """``type`` is one of plane, spherical, em_plane, gradient, constant, zero."""

    type: str
    k: float = 1.0
    direction: list[float] = field(default_factory=lambda: [0.0, 0.0, 1.0])
    source: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    value: float = 1.0


@dataclass(frozen=True)
class ScattererSpec:
    center: list[float]
    radius: float


@dataclass(frozen=True)
class SweepSpec:
    """``parameter`` is ``N`` (fixed partition), ``elements`` (n x n, fixed N)
    or ``dof`` (n x n elements of degree n)."""

    parameter: str
    values: list[int]


@dataclass(frozen=True)
class SliceSpec:
    """Planar grid ``plane`` in {xy, xz, yz} at ``offset`` along the normal."""

    name: str
    plane: str
    extent: list[float]
    resolution: list[int]
    offset: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    N: int
    L: int
    wave: WaveSpec
    partition: PartitionSpec = field(default_factory=lambda: PartitionSpec(3, 4))
    radius: float = 1.0
    transform: str = "sph"
    problem: str = "acoustic"
    scatterers: list[ScattererSpec] = field(default_factory=list)
    sweep: SweepSpec | None = None
    report_degrees: list[int] = field(default_factory=list)
    slices: list[SliceSpec] = field(default_factory=list)
    residual_points: int = 400
    description: str = ""


def _convert(tp, value, path: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _convert(inner[0], value, path)
    if origin is list:
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list")
        return [_convert(args[0], v, f"{path}[{i}]") for i, v in enumerate(value)]
    if dataclasses.is_dataclass(tp):
        return _from_dict(tp, value, path)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
        return value
    return value


def _from_dict(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{path or 'config'}: unknown key '{unknown[0]}'")
    kwargs = {}
    for f in dataclasses.fields(cls):
        sub = f"{path}.{f.name}" if path else f.name
        if f.name in data:
            kwargs[f.name] = _convert(hints[f.name], data[f.name], sub)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ConfigError(f"{sub}: required key missing")
    return cls(**kwargs)


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    cfg = _from_dict(ExperimentConfig, data, "")
    if cfg.transform not in ("sph", "vsh"):
        raise ConfigError("transform: must be 'sph' or 'vsh'")
    if cfg.problem not in ("acoustic", "em"):
        raise ConfigError("problem: must be 'acoustic' or 'em'")
    if cfg.wave.type not in ("plane", "spherical", "em_plane", "gradient", "constant", "zero"):
        raise ConfigError(f"wave.type: unknown wave '{cfg.wave.type}'")
    if cfg.sweep is not None and cfg.sweep.parameter not in ("N", "elements", "dof"):
        raise ConfigError("sweep.parameter: must be 'N', 'elements' or 'dof'")
    return cfg


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _partition(spec: PartitionSpec, N: int):
    from .grid import build_custom_partition, build_uniform_partition

    if spec.theta_breaks is not None or spec.phi_breaks is not None:
        if spec.theta_breaks is None or spec.phi_breaks is None:
            raise ConfigError("partition: give both theta_breaks and phi_breaks")
        return build_custom_partition(spec.theta_breaks, spec.phi_breaks, N)
    if spec.n_theta is None or spec.m_phi is None:
        raise ConfigError("partition: give n_theta and m_phi or explicit breaks")
    return build_uniform_partition(spec.n_theta, spec.m_phi, N)


def _scalar_wave(wave: WaveSpec):
    """Cartesian scalar function for the wave spec."""
    import numpy as np

    from .fields import plane_wave, spherical_wave

    if wave.type == "plane":
        return plane_wave(wave.k, wave.direction)
    if wave.type == "spherical":
        return spherical_wave(wave.k, wave.source)
    if wave.type == "constant":
        return lambda x: np.full(np.shape(x)[:-1], wave.value, dtype=complex)
    if wave.type == "zero":
        return lambda x: np.zeros(np.shape(x)[:-1], dtype=complex)
    raise ConfigError(f"wave.type: '{wave.type}' is not a scalar wave")


def _vector_wave(wave: WaveSpec, radius: float):
    """Cartesian-valued function of ``(θ, φ)`` on the sphere."""
    import numpy as np

    from .fields import gradient_test_field, sphere_points

    if wave.type == "gradient":
        return gradient_test_field(wave.k, wave.direction, radius)
    if wave.type == "em_plane":

        def F(th, ph):
            x = sphere_points(th, ph, radius)
            e = np.exp(1j * wave.k * x[..., 2])
            return np.stack([e, e, np.zeros_like(e)], axis=-1)

        return F
    if wave.type == "zero":
        return lambda th, ph: np.zeros(np.shape(th) + (3,), dtype=complex)
    raise ConfigError(f"wave.type: '{wave.type}' is not a vector wave")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in r])


def _coeff_rows(c, family=None):
    for l, m, v in c.rows():
        row = [l, m, float(v.real), float(v.imag)]
        yield ([family] + row) if family is not None else row


def _slice_points(s: SliceSpec):
    import numpy as np

    if s.plane not in ("xy", "xz", "yz"):
        raise ConfigError(f"slices.{s.name}.plane: must be xy, xz or yz")
    u = np.linspace(s.extent[0], s.extent[1], s.resolution[0])
    v = np.linspace(s.extent[2], s.extent[3], s.resolution[1])
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.full_like(U, s.offset)
    axes = {"xy": (U, V, W), "xz": (U, W, V), "yz": (W, U, V)}[s.plane]
    return np.stack(axes, axis=-1).reshape(-1, 3)


def _summary(out: Path, data: dict):
    (out / "summary.json").write_text(json.dumps(data, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _transform_once(cfg: ExperimentConfig, partition, L: int):
    from .fields import (
        funk_hecke_coeffs,
        gradient_test_coeffs,
        on_sphere,
        coeff_error,
        vsh_error,
    )
    from .grid import sample_scalar, sample_vector_cartesian
    from .sphtrans import SphCoeffs, sph_forward
    from .vshtrans import vsh_forward

    w = cfg.wave
    t0 = time.perf_counter()
    if cfg.transform == "sph":
        field_ = sample_scalar(on_sphere(_scalar_wave(w), cfg.radius), partition)
        t0 = time.perf_counter()
        coeffs = sph_forward(field_, L)
        elapsed = time.perf_counter() - t0
        exact = None
        if w.type == "plane":
            exact = funk_hecke_coeffs(w.k, cfg.radius, w.direction, L)
        elif w.type in ("constant", "zero"):
            exact = SphCoeffs.zeros(L)
            if w.type == "constant":
                exact.a[0, L] = 2.0 * 3.141592653589793 ** 0.5 * w.value
        err = coeff_error(coeffs, exact) if exact is not None else None
    else:
        field_ = sample_vector_cartesian(_vector_wave(w, cfg.radius), partition)
        t0 = time.perf_counter()
        coeffs = vsh_forward(field_, L)
        elapsed = time.perf_counter() - t0
        exact = gradient_test_coeffs(w.k, cfg.radius, w.direction, L) if w.type == "gradient" else None
        err = vsh_error(coeffs, exact) if exact is not None else None
    return coeffs, err, elapsed


def cmd_transform(cfg: ExperimentConfig, out: Path) -> dict:
    """Forward SPH/VSH transform of an analytic field, with error against the
    exact coefficients when they are known."""
    from .fields import degree_maxima

    if cfg.sweep is not None:
        rows = []
        for v in cfg.sweep.values:
            if cfg.sweep.parameter == "N":
                part = _partition(cfg.partition, v)
            elif cfg.sweep.parameter == "elements":
                part = _partition(PartitionSpec(v, v), cfg.N)
            else:
                part = _partition(PartitionSpec(v, v), v)
            _, err, elapsed = _transform_once(cfg, part, cfg.L)
            rows.append([v, err, elapsed])
            print(f"{cfg.sweep.parameter}={v} E_{cfg.L}={err:.4e} time={elapsed:.3f}s")
        _write_csv(out / "sweep.csv", [cfg.sweep.parameter, "error", "seconds"], rows)
        summary = {"experiment": cfg.experiment, "sweep": rows}
        _summary(out, summary)
        return summary
    part = _partition(cfg.partition, cfg.N)
    coeffs, err, elapsed = _transform_once(cfg, part, cfg.L)
    if cfg.transform == "sph":
        _write_csv(out / "coefficients.csv", ["l", "m", "re", "im"], _coeff_rows(coeffs))
        maxima = degree_maxima(coeffs)
    else:
        rows = []
        for fam, c in (("r", coeffs.r), ("1", coeffs.v1), ("2", coeffs.v2)):
            rows.extend(_coeff_rows(c, fam))
        _write_csv(out / "coefficients.csv", ["family", "l", "m", "re", "im"], rows)
        maxima = degree_maxima(coeffs.r)
    report = {int(l): float(maxima[l]) for l in cfg.report_degrees if l <= cfg.L}
    if err is not None:
        print(f"E_{cfg.L} = {err:.4e}")
    print(f"wall time {elapsed:.3f} s")
    for l, v in report.items():
        print(f"max_m |a_{l}^m| = {v:.4e}")
    summary = {
        "experiment": cfg.experiment,
        "L": cfg.L,
        "N": cfg.N,
        "error": err,
        "seconds": elapsed,
        "degree_maxima": report,
    }
    _summary(out, summary)
    return summary


def cmd_scatter_single(cfg: ExperimentConfig, out: Path) -> dict:
    """Single-sphere acoustic or electromagnetic solve with decay table and slices."""
    import numpy as np

    from .fields import degree_maxima, on_sphere
    from .grid import cart_to_sph, sample_scalar, sample_vector_cartesian, sph_to_cart
    from .scatter import eval_acoustic, eval_em, solve_acoustic_single, solve_em_single

    part = _partition(cfg.partition, cfg.N)
    b = cfg.radius
    t0 = time.perf_counter()
    if cfg.problem == "acoustic":
        bnd = sample_scalar(on_sphere(_scalar_wave(cfg.wave), b), part)
        sol = solve_acoustic_single(bnd, cfg.wave.k, cfg.L, b)
        cols = {"U": degree_maxima(sol.coeffs)}
        _write_csv(out / "coefficients.csv", ["l", "m", "re", "im"], _coeff_rows(sol.coeffs))
    else:
        bnd = sample_vector_cartesian(_vector_wave(cfg.wave, b), part)
        sol = solve_em_single(bnd, cfg.wave.k, cfg.L, b)
        cols = {"V": degree_maxima(sol.V), "W": degree_maxima(sol.W)}
        rows = list(_coeff_rows(sol.V, "V")) + list(_coeff_rows(sol.W, "W"))
        _write_csv(out / "coefficients.csv", ["family", "l", "m", "re", "im"], rows)
    elapsed = time.perf_counter() - t0
    degrees = cfg.report_degrees or list(range(cfg.L + 1))
    names = list(cols)
    _write_csv(
        out / "decay.csv",
        ["l"] + names,
        ([l] + [float(cols[n][l]) for n in names] for l in degrees if l <= cfg.L),
    )
    for l in degrees:
        if l <= cfg.L:
            print(f"l={l} " + " ".join(f"{n}={cols[n][l]:.4e}" for n in names))
    for s in cfg.slices:
        pts = _slice_points(s)
        r = np.linalg.norm(pts, axis=-1)
        inside = r < b
        rr = np.where(inside, b, r)
        th = np.arccos(np.clip(pts[:, 2] / np.where(rr > 0, rr, 1.0), -1.0, 1.0))
        ph = np.arctan2(pts[:, 1], pts[:, 0])
        if cfg.problem == "acoustic":
            u = eval_acoustic(sol, rr, th, ph)
            u[inside] = np.nan
            _write_csv(
                out / f"slice_{s.name}.csv",
                ["x", "y", "z", "re", "im"],
                ([*p, float(v.real), float(v.imag)] for p, v in zip(pts, u)),
            )
        else:
            E, _ = eval_em(sol, rr, th, ph)
            Ec = sph_to_cart(E, th, ph)
            Ec[inside] = np.nan
            head = ["x", "y", "z"] + [f"E{c}_{p}" for c in "xyz" for p in ("re", "im")]
            _write_csv(
                out / f"slice_{s.name}.csv",
                head,
                ([*p] + [float(f(v)) for v in e for f in (np.real, np.imag)] for p, e in zip(pts, Ec)),
            )
    summary = {
        "experiment": cfg.experiment,
        "problem": cfg.problem,
        "seconds": elapsed,
        "decay": {n: {int(l): float(cols[n][l]) for l in degrees if l <= cfg.L} for n in names},
    }
    _summary(out, summary)
    return summary


def cmd_scatter_multi(cfg: ExperimentConfig, out: Path, seed: int = 0) -> dict:
    """Coupled multi-sphere solve with decay table, residual report and slices."""
    import numpy as np

    from .fields import on_sphere
    from .grid import sample_scalar
    from .multiscatter import (
        ScattererSet,
        assemble_and_solve,
        boundary_residual,
        eval_total_field,
    )

    if cfg.problem != "acoustic":
        raise ConfigError("problem: scatter-multi supports acoustic only")
    if not cfg.scatterers:
        raise ConfigError("scatterers: at least one scatterer is required")
    M = len(cfg.scatterers)
    unknowns = M * (cfg.L + 1) ** 2
    if unknowns > MAX_DENSE_UNKNOWNS:
        Lmax = int((MAX_DENSE_UNKNOWNS / M) ** 0.5) - 1
        raise ConfigError(
            f"{unknowns} unknowns exceed the dense budget of {MAX_DENSE_UNKNOWNS}; use L <= {Lmax}"
        )
    sset = ScattererSet(
        np.array([s.center for s in cfg.scatterers], float),
        np.array([s.radius for s in cfg.scatterers], float),
    )
    part = _partition(cfg.partition, cfg.N)
    fn = _scalar_wave(cfg.wave)
    bnd = [sample_scalar(on_sphere(fn, sset.radii[i], sset.centers[i]), part) for i in range(M)]
    t0 = time.perf_counter()
    sol = assemble_and_solve(sset, cfg.wave.k, cfg.L, bnd)
    elapsed = time.perf_counter() - t0
    res = boundary_residual(sol, bnd, cfg.residual_points, seed)
    L = cfg.L
    g = np.array([np.abs(sol.G[:, l * l : (l + 1) ** 2]).max() for l in range(L + 1)])
    C = np.array([np.abs(sol.A[:, l * l : (l + 1) ** 2]).max() for l in range(L + 1)])
    degrees = cfg.report_degrees or list(range(L + 1))
    _write_csv(out / "decay.csv", ["l", "g", "C"], ([l, float(g[l]), float(C[l])] for l in degrees if l <= L))
    for i in range(M):
        _write_csv(out / f"coefficients_{i}.csv", ["l", "m", "re", "im"], _coeff_rows(sol.coeffs(i)))
    for l in degrees:
        if l <= L:
            print(f"l={l} g={g[l]:.4e} C={C[l]:.4e}")
    print(f"solve time {elapsed:.2f} s; boundary residual max {res.max():.3e}")
    for s in cfg.slices:
        pts = _slice_points(s)
        inside = np.zeros(len(pts), dtype=bool)
        for i in range(M):
            inside |= np.linalg.norm(pts - sset.centers[i], axis=-1) < sset.radii[i]
        u = np.full(len(pts), np.nan + 0j)
        if np.any(~inside):
            u[~inside] = eval_total_field(sol, pts[~inside])
        _write_csv(
            out / f"slice_{s.name}.csv",
            ["x", "y", "z", "re", "im"],
            ([*p, float(v.real), float(v.imag)] for p, v in zip(pts, u)),
        )
    summary = {
        "experiment": cfg.experiment,
        "unknowns": unknowns,
        "seconds": elapsed,
        "system_residual": sol.system_residual,
        "boundary_residual": [float(x) for x in res],
        "decay": {int(l): {"g": float(g[l]), "C": float(C[l])} for l in degrees if l <= L},
    }
    (out / "residual.json").write_text(json.dumps(summary["boundary_residual"]))
    _summary(out, summary)
    return summary


def cmd_verify(out: Path | None = None, seed: int = 0, perturb: float = 0.0) -> int:
    """Run the oracle cross-checks; return the number of failures."""
    from .verification import run_checks

    results = run_checks(seed=seed, perturb=perturb)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failures += not r.passed
        print(f"{status} {r.name}: delta={r.delta:.3e} tol={r.tol:.1e}")
    if out is not None:
        (out / "verify.json").write_text(
            json.dumps([r.asdict() for r in results], indent=2)
        )
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return failures


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _set_threads(n: int | None):
    if n is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sphelem", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("transform", "scatter-single", "scatter-multi"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment config")
    v = sub.add_parser("verify")
    v.add_argument("--perturb", type=float, default=0.0, help="add a relative error to self-test the harness")
    for sp in sub.choices.values():
        sp.add_argument("--out", default="results", help="output directory")
        sp.add_argument("--threads", type=int, default=None, help="BLAS thread count")
        sp.add_argument("--seed", type=int, default=0, help="seed for random test points")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _set_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "verify":
            return 1 if cmd_verify(out, args.seed, args.perturb) else 0
        cfg = load_config(args.config)
        if args.command == "transform":
            cmd_transform(cfg, out)
        elif args.command == "scatter-single":
            cmd_scatter_single(cfg, out)
        else:
            cmd_scatter_multi(cfg, out, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
