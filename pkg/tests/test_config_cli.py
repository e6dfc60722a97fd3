from __future__ import annotations

import json
import subprocess
import sys

import pytest

from gaugeforge.cli import main
from gaugeforge.config import parse_config
from gaugeforge.errors import ConfigError
from gaugeforge.su_algebra import HalfInt

BASE = ["--group", "u1", "--x", "1", "--extents", "2,2", "--boundary", "open", "--l-max", "1"]


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_spectrum_json_and_stderr_timing(capsys):
    rc, out, err = run(capsys, "spectrum", *BASE, "--steps", "256")
    assert rc == 0
    doc = json.loads(out)
    assert doc["command"] == "spectrum" and "wall_time_s" not in doc
    r = doc["result"]
    assert r["series_K"] == 256 and r["method"] == "fourier"
    assert abs(r["eigenvalues"][0] - r["oracle_eigenvalues"][0]) < r["resolution"]
    assert "wall time" in err


def test_timing_flag(capsys):
    rc, out, _ = run(capsys, "prepare", *BASE, "--timing")
    assert rc == 0 and json.loads(out)["wall_time_s"] >= 0


def test_byte_determinism(capsys):
    a = run(capsys, "spectrum", *BASE, "--steps", "128")[1]
    b = run(capsys, "spectrum", *BASE, "--steps", "128")[1]
    assert a == b


def test_echo_config_roundtrip(capsys, tmp_path):
    echo = tmp_path / "run.toml"
    rc, first, _ = run(capsys, "prepare", *BASE, "--C", "0.3", "--echo-config", str(echo))
    assert rc == 0 and echo.exists()
    rc, second, _ = run(capsys, "prepare", "--config", str(echo))
    assert rc == 0
    a, b = json.loads(first), json.loads(second)
    assert a["config"] == b["config"] and a["result"] == b["result"]
    assert b["overrides"] == []


def test_flags_override_file(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('group = "u1"\nx = 2.0\n[lattice]\nextents = [2, 2]\nboundary = "open"\n'
                   "[cutoffs]\nl_max = 1\n[trial]\nC = 0.1\n")
    rc, out, _ = run(capsys, "prepare", "--config", str(cfg), "--C", "0.2", "--set", "x=0.5")
    doc = json.loads(out)
    assert rc == 0 and doc["config"]["trial"]["C"] == 0.2 and doc["config"]["x"] == 0.5
    assert doc["overrides"] == ["trial.C", "x"]


def test_exit_codes(capsys):
    rc, _, err = run(capsys, "spectrum", "--group", "su2", "--x", "1", "--extents", "2,2")
    assert rc == 2 and "cutoffs.j_max" in err
    rc, _, err = run(capsys, "spectrum", *BASE, "--basis", "full", "--extents", "3,3",
                     "--set", "simulator.dim_cap=10")
    assert rc == 3 and "CapacityError" in err
    rc, _, err = run(capsys, "spectrum", *BASE, "--dt", "5", "--steps", "128")
    assert rc == 4 and "undersampled" in err
    rc, _, err = run(capsys, "prepare", *BASE, "--config", "/nonexistent.toml")
    assert rc == 2


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("GAUGEFORGE_THREADS", "zero")
    rc, _, err = run(capsys, "prepare", *BASE)
    assert rc == 2 and "GAUGEFORGE_THREADS" in err
    monkeypatch.setenv("GAUGEFORGE_THREADS", "1")
    assert run(capsys, "prepare", *BASE)[0] == 0


def test_gatecount_and_wilson(capsys, tmp_path):
    rc, out, _ = run(capsys, "gatecount", *BASE)
    g = json.loads(out)["result"]
    assert rc == 0 and g["count"] == "exact" and g["qubits"] == 12
    circ = tmp_path / "w.txt"
    rc, out, _ = run(capsys, "wilson", *BASE, "--wilson-steps", "4", "--circuit", str(circ))
    w = json.loads(out)["result"]
    assert rc == 0 and w["n_legs"] == 4 and circ.read_text().strip()


def test_cg_table_csv(capsys, tmp_path):
    rc, out, _ = run(capsys, "cg-table", "--group", "su2", "--j", "1/2")
    lines = out.splitlines()
    assert rc == 0 and lines[0].startswith("# gaugeforge") and lines[1] == "symbol,j,m,dj,dm,value"
    rows = [l.split(",") for l in lines[2:]]
    assert len(rows) == 8 and all(len(r) == 6 for r in rows)
    dest = tmp_path / "t.csv"
    assert run(capsys, "cg-table", "--group", "su3", "--p", "1", "--q", "0", "--out", str(dest))[0] == 0
    assert dest.read_text().count("\n") > 2


def test_parse_config_rules():
    raw = {"group": "su2", "x": 1, "lattice": {"extents": [2, 2]}, "cutoffs": {"j_max": "1/2"}}
    assert parse_config(raw=raw).cutoffs.j_max == HalfInt(1)
    raw["cutoffs"]["j_max"] = 0.5
    assert parse_config(raw=raw).cutoffs.j_max == HalfInt(1)
    with pytest.raises(ConfigError):
        parse_config(raw={**raw, "bogus": 1})
    with pytest.raises(ConfigError):
        parse_config(raw={**raw, "cutoffs": {"j_max": "1/2", "l_max": 2}})
    with pytest.raises(ConfigError):
        parse_config(raw={**raw, "lattice": {"extents": [2, 2], "dimension": 3}})
    with pytest.raises(ConfigError):
        parse_config(raw={**raw, "encoding": "gray"})


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "gaugeforge", "cg-table", "--group", "su2", "--j", "1"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and "symbol" in p.stdout
