import json
import re
import subprocess
import sys

import numpy as np
import pytest

from vacua import ConfigError
from vacua.cli import run_command
from vacua.config import RunConfig
from vacua.output import emit_csv, emit_svg, manifest_digest, read_csv, sha256_file, write_manifest


def _polylines(svg):
    return re.findall(r'points="([^"]*)"', svg)


def test_empty_trajectory_gives_header_only(tmp_path):
    path = tmp_path / "e.csv"
    emit_csv({"t": np.array([]), "sigma": np.array([])}, path)
    assert path.read_bytes() == b"t,sigma\n"


def test_csv_round_trips_floats(tmp_path):
    vals = np.array([0.1, 1 / 3, -2.5e-300, 1e22, np.pi])
    path = tmp_path / "v.csv"
    digest = emit_csv({"t": np.arange(5.0), "x": vals}, path)
    assert b"\r" not in path.read_bytes()
    np.testing.assert_array_equal(read_csv(path)["x"], vals)
    assert digest == sha256_file(path)


def test_csv_rejects_ragged_columns(tmp_path):
    with pytest.raises(ValueError):
        emit_csv({"a": np.zeros(3), "b": np.zeros(4)}, tmp_path / "r.csv")


def test_svg_constant_series_is_horizontal(tmp_path):
    csv = tmp_path / "c.csv"
    emit_csv({"t": np.linspace(0, 1, 11), "y": np.full(11, 2.0)}, csv)
    svg_path = tmp_path / "c.svg"
    emit_svg(csv, "t", "y", svg_path)
    svg = svg_path.read_text()
    assert 'width="800" height="500"' in svg
    (pts,) = _polylines(svg)
    ys = {p.split(",")[1] for p in pts.split()}
    assert len(ys) == 1


def test_svg_missing_column(tmp_path):
    csv = tmp_path / "c.csv"
    emit_csv({"t": np.linspace(0, 1, 11), "y": np.zeros(11)}, csv)
    with pytest.raises(ConfigError):
        emit_svg(csv, "t", "nope", tmp_path / "x.svg")


def test_svg_is_deterministic(tmp_path):
    csv = tmp_path / "c.csv"
    t = np.linspace(0, 5, 200)
    emit_csv({"t": t, "a": np.sin(t), "b": np.cos(t)}, csv)
    h1 = emit_svg(csv, "t", ["a", "b"], tmp_path / "1.svg", square=True)
    h2 = emit_svg(csv, "t", ["a", "b"], tmp_path / "2.svg", square=True)
    assert h1 == h2
    assert len(_polylines((tmp_path / "1.svg").read_text())) == 2


def test_manifest_digest_ignores_timing(tmp_path):
    a = write_manifest(tmp_path / "a.json", {"k": 1.0}, {"x": 2.0}, {"f.csv": "00"}, wall_time=1.0)
    b = write_manifest(tmp_path / "b.json", {"k": 1.0}, {"x": 2.0}, {"f.csv": "00"}, wall_time=9.0)
    assert a["digest"] == b["digest"]
    assert manifest_digest(json.loads((tmp_path / "a.json").read_text())) == a["digest"]
    c = write_manifest(tmp_path / "c.json", {"k": 2.0}, {"x": 2.0}, {"f.csv": "00"}, wall_time=1.0)
    assert c["digest"] != a["digest"]


def test_config_rejects_unknown_keys(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"system": "boson", "profile": "tanh1", "colour": "red"})
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"system": "boson", "profile": "tanh1", "colour": "red"}))
    assert run_command(["solve", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == 2


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"system": "boson", "profile": "tanh1", "k": 2.0, "t0": -1, "t1": 1, "n_samples": 100}))
    c = RunConfig.load(cfg, {"k": 3.0})
    assert c.k == 3.0 and c.t0 == -1.0 and c.n_samples == 100


@pytest.mark.parametrize("argv", [
    ["solve", "--system", "boson", "--profile", "inverse_linear", "--t0", "-10", "--t1", "5"],
    ["solve", "--system", "boson", "--profile", "tanh1", "--t0", "3", "--t1", "1"],
    ["solve", "--system", "boson", "--profile", "nope"],
    ["solve", "--system", "quark", "--profile", "tanh1"],
    ["solve", "--system", "fermion", "--r", "0.1"],
    ["vacuum", "--system", "boson", "--profile", "tanh1"],
])
def test_config_errors_exit_2(tmp_path, argv, capsys):
    out = tmp_path / "never.csv"
    assert run_command(argv + ["--out", str(out)]) == 2
    assert not out.exists()
    assert "config error" in capsys.readouterr().err


def test_numerical_failure_exit_3(tmp_path, capsys):
    argv = ["vacuum", "--system", "boson", "--profile", "tanh2", "--window", "5", "40", "--restarts", "1",
            "--max-evals", "2", "--out", str(tmp_path / "v.json")]
    assert run_command(argv) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_solve_tanh1_vacuum(tmp_path):
    out = tmp_path / "traj.csv"
    argv = ["solve", "--system", "boson", "--profile", "tanh1", "--k", "1", "--H", "1", "--t0", "-10", "--t1", "30",
            "--r", "0", "--delta", "0", "--out", str(out)]
    assert run_command(argv) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2001
    cols = read_csv(out)
    assert np.all(np.diff(cols["sigma"]) > -1e-15)
    manifest = json.loads((tmp_path / "traj.json").read_text())
    assert manifest["artifacts"]["traj.csv"] == sha256_file(out)
    assert manifest["results"]["max_wronskian_defect"] < 1e-8


def test_solve_is_byte_identical(tmp_path):
    argv = ["solve", "--system", "fermion", "--t0", "-20", "--t1", "0", "--n-samples", "500"]
    assert run_command(argv + ["--out", str(tmp_path / "a.csv")]) == 0
    assert run_command(argv + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    ma = json.loads((tmp_path / "a.json").read_text())
    mb = json.loads((tmp_path / "b.json").read_text())
    assert ma["results"] == mb["results"]


def test_vacuum_tanh2_out_window(tmp_path):
    out = tmp_path / "run.json"
    argv = ["vacuum", "--system", "boson", "--profile", "tanh2", "--window", "5", "40", "--space", "theta",
            "--out", str(out), "--csv", str(tmp_path / "run.csv")]
    assert run_command(argv) == 0
    m = json.loads(out.read_text())
    assert m["results"]["result"]["classification"] == "OutVacuum"
    assert m["results"]["side"] == "out"
    assert m["artifacts"]["run.csv"] == sha256_file(tmp_path / "run.csv")


def test_plot_from_solve(tmp_path):
    csv = tmp_path / "traj.csv"
    assert run_command(["solve", "--system", "boson", "--profile", "tanh1", "--out", str(csv)]) == 0
    assert run_command(["plot", str(csv), "--x", "t", "--y", "sigma", "--out", str(tmp_path / "a.svg")]) == 0
    assert run_command(["plot", str(csv), "--x", "t", "--y", "sigma", "--out", str(tmp_path / "b.svg")]) == 0
    a = (tmp_path / "a.svg").read_bytes()
    assert a == (tmp_path / "b.svg").read_bytes()
    assert a.startswith(b"<svg") and a.rstrip().endswith(b"</svg>")
    assert run_command(["plot", str(csv), "--y", "missing", "--out", str(tmp_path / "c.svg")]) == 2


def test_sweep_parallel_matches_serial(tmp_path, monkeypatch):
    argv = ["sweep", "--system", "boson", "--profile", "tanh1", "--t0", "0", "--t1", "5", "--n-samples", "200",
            "--param", "r", "--values", "0", "0.1", "0.2"]
    assert run_command(argv + ["--out-dir", str(tmp_path / "s")]) == 0
    monkeypatch.setenv("VACUA_THREADS", "3")
    assert run_command(argv + ["--out-dir", str(tmp_path / "p")]) == 0
    ms = json.loads((tmp_path / "s" / "manifest.json").read_text())
    mp = json.loads((tmp_path / "p" / "manifest.json").read_text())
    assert ms["digest"] == mp["digest"]
    assert [p["r"] for p in ms["results"]] == [0.0, 0.1, 0.2]
    for i in range(3):
        name = f"point_{i:03d}.csv"
        assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes()


def test_constrained_solve_columns(tmp_path):
    out = tmp_path / "c.csv"
    assert run_command(["solve", "--system", "constrained_phi", "--t0", "20", "--t1", "100", "--out", str(out)]) == 0
    cols = read_csv(out)
    assert "sigma2" in cols
    np.testing.assert_allclose(cols["wronskian_over_X"], 1.0, atol=1e-8)


def test_validate_command(tmp_path, capsys):
    assert run_command(["validate", "--out", str(tmp_path / "v.json")]) == 0
    report = json.loads((tmp_path / "v.json").read_text())
    assert report and all(c["passed"] for c in report)
    assert "PASS" in capsys.readouterr().out


def test_entry_point_module(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "vacua", "solve", "--system", "boson", "--profile", "nope"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 2
    proc = subprocess.run([sys.executable, "-m", "vacua", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "solve" in proc.stdout
