import csv
import json
import os
from pathlib import Path

import numpy as np
import pytest

from sphelem import cli
from sphelem.cli import ConfigError, main, parse_config

ROOT = Path(__file__).resolve().parents[1]


def base(**kw):
    d = {"experiment": "t", "N": 8, "L": 4, "wave": {"type": "constant", "value": 1.0}}
    d.update(kw)
    return d


def write(tmp_path, d, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("cfg", sorted((ROOT / "configs").glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_parse(cfg):
    assert parse_config(cfg.read_text()).experiment == cfg.stem


def test_unknown_keys_rejected_with_path():
    with pytest.raises(ConfigError, match="unknown key 'colour'"):
        parse_config(json.dumps(base(colour=1)))
    with pytest.raises(ConfigError, match=r"^wave: unknown key 'speed'"):
        parse_config(json.dumps(base(wave={"type": "plane", "speed": 3})))
    bad = base(scatterers=[{"center": [0, 0, 0], "radius": 1.0, "mass": 2}])
    with pytest.raises(ConfigError, match=r"scatterers\[0\]: unknown key 'mass'"):
        parse_config(json.dumps(bad))


def test_syntax_and_type_errors():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config('{"experiment": "x",\n "N": }')
    with pytest.raises(ConfigError, match="N: expected an integer"):
        parse_config(json.dumps(base(N=2.5)))
    with pytest.raises(ConfigError, match="L: required key missing"):
        d = base()
        del d["L"]
        parse_config(json.dumps(d))
    with pytest.raises(ConfigError, match="wave.type"):
        parse_config(json.dumps(base(wave={"type": "laser"})))


def test_transform_constant(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["transform", "--config", write(tmp_path, base()), "--out", str(out)]) == 0
    rows = read_csv(out / "coefficients.csv")
    assert rows[0] == ["l", "m", "re", "im"]
    assert float(rows[1][2]) == pytest.approx(2 * np.sqrt(np.pi))
    summary = json.loads((out / "summary.json").read_text())
    assert summary["error"] < 1e-14
    assert "E_4" in capsys.readouterr().out


def test_transform_sweep_and_vsh(tmp_path):
    d = base(L=6, transform="vsh", wave={"type": "gradient", "k": 3.0, "direction": [0, 1, 0]}, sweep={"parameter": "N", "values": [6, 10, 14]})
    out = tmp_path / "o"
    assert main(["transform", "--config", write(tmp_path, d), "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")[1:]
    errs = [float(r[1]) for r in rows]
    assert errs[0] > errs[1] > errs[2]


def test_scatter_single_zero_wave(tmp_path):
    d = base(radius=0.5, wave={"type": "zero"}, slices=[{"name": "s", "plane": "xy", "extent": [-1, 1, -1, 1], "resolution": [5, 5]}])
    out = tmp_path / "o"
    assert main(["scatter-single", "--config", write(tmp_path, d), "--out", str(out)]) == 0
    vals = np.array([[float(x) for x in r[2:]] for r in read_csv(out / "coefficients.csv")[1:]])
    assert np.all(vals == 0)
    sl = read_csv(out / "slice_s.csv")
    assert sl[0] == ["x", "y", "z", "re", "im"] and len(sl) == 26


def test_scatter_single_em_slices(tmp_path):
    d = base(radius=0.5, L=8, N=10, problem="em", wave={"type": "em_plane", "k": 4.0},
             slices=[{"name": "xz", "plane": "xz", "extent": [-2, 2, -2, 2], "resolution": [4, 4]}])
    out = tmp_path / "o"
    assert main(["scatter-single", "--config", write(tmp_path, d), "--out", str(out)]) == 0
    sl = read_csv(out / "slice_xz.csv")
    assert sl[0][3:] == ["Ex_re", "Ex_im", "Ey_re", "Ey_im", "Ez_re", "Ez_im"]
    assert len(sl) == 17


def test_multi_single_sphere_matches_single(tmp_path):
    wave = {"type": "plane", "k": 6.0, "direction": [1, 0, 0]}
    d1 = base(N=16, L=12, radius=0.4, wave=wave)
    d2 = base(N=16, L=12, wave=wave, scatterers=[{"center": [0, 0, 0], "radius": 0.4}])
    assert main(["scatter-single", "--config", write(tmp_path, d1, "a.json"), "--out", str(tmp_path / "a")]) == 0
    assert main(["scatter-multi", "--config", write(tmp_path, d2, "b.json"), "--out", str(tmp_path / "b")]) == 0
    a = np.array([[float(x) for x in r] for r in read_csv(tmp_path / "a" / "coefficients.csv")[1:]])
    b = np.array([[float(x) for x in r] for r in read_csv(tmp_path / "b" / "coefficients_0.csv")[1:]])
    assert np.max(np.abs(a - b)) <= 1e-12


def test_multi_budget_refusal(tmp_path, capsys):
    rc = main(["scatter-multi", "--config", str(ROOT / "configs" / "grid25_k35.json"), "--out", str(tmp_path)])
    assert rc == 2
    assert "use L <= 27" in capsys.readouterr().err


def test_outputs_bit_reproducible(tmp_path):
    d = base(N=12, L=10, wave={"type": "plane", "k": 5.0, "direction": [1, 2, 3]})
    cfg = write(tmp_path, d)
    main(["transform", "--config", cfg, "--out", str(tmp_path / "x")])
    main(["transform", "--config", cfg, "--out", str(tmp_path / "y")])
    assert (tmp_path / "x" / "coefficients.csv").read_bytes() == (tmp_path / "y" / "coefficients.csv").read_bytes()


def test_verify_and_perturbation(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    names = [r["name"] for r in report]
    assert any("translation k=90" in n for n in names)
    assert all(r["passed"] for r in report)
    assert main(["verify", "--out", str(tmp_path), "--perturb", "1e-3"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_threads_flag_sets_environment(tmp_path, monkeypatch):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        monkeypatch.delenv(var, raising=False)
    main(["transform", "--config", write(tmp_path, base()), "--out", str(tmp_path / "o"), "--threads", "1"])
    assert os.environ["OMP_NUM_THREADS"] == "1"


def test_slice_points_planes():
    s = cli.SliceSpec("a", "yz", [0, 1, 2, 3], [2, 2], offset=0.5)
    pts = cli._slice_points(s)
    np.testing.assert_array_equal(pts[:, 0], 0.5)
    with pytest.raises(ConfigError):
        cli._slice_points(cli.SliceSpec("a", "uv", [0, 1, 0, 1], [2, 2]))
