"""CLI contract: exit codes, golden output, config round-trips."""

import json

import numpy as np
import pytest

from bergman_lab.cli import run
from bergman_lab.reports import load_report


def toml_dump(d):
    lines = []
    for key, val in d.items():
        if isinstance(val, bool):
            lines.append(f"{key} = {'true' if val else 'false'}")
        elif isinstance(val, (int, float)):
            lines.append(f"{key} = {val!r}")
        elif isinstance(val, (list, tuple)):
            lines.append(f"{key} = [{', '.join(repr(x) for x in val)}]")
        else:
            lines.append(f'{key} = "{val}"')
    return "\n".join(lines) + "\n"


# -- exit codes ---------------------------------------------------------------

def test_unknown_flag_exits_2(capsys):
    assert run(["gram", "--k", "2", "--frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_bad_grid_value_exits_2(capsys):
    assert run(["validate", "--grid", "banana"]) == 2
    assert "--grid" in capsys.readouterr().err


def test_malformed_config_names_key(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("unknown_knob = 3\n")
    assert run(["validate", "--config", str(cfg)]) == 2
    assert "unknown_knob" in capsys.readouterr().err


def test_validate_failure_exits_1(tmp_path, capsys):
    cfg = tmp_path / "strict.toml"
    cfg.write_text("k_list = [2, 4]\ngrid = [16, 16]\n"
                   "tol_identity = 1e-30\ntol_tight = 1e-30\n")
    assert run(["validate", "--config", str(cfg)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_validate_ok_exits_0(capsys):
    assert run(["validate", "--k", "6", "--epsilon", "0.05",
                "--grid", "24,24"]) == 0
    assert "all identity checks passed" in capsys.readouterr().out


# -- golden output ------------------------------------------------------------

def test_gram_golden_stdout(capsys):
    assert run(["gram", "--k", "2", "--metric", "fs"]) == 0
    assert "[1, 0.5, 1]" in capsys.readouterr().out


def test_gram_persists_matrix(tmp_path):
    out = tmp_path / "gram.json"
    assert run(["gram", "--k", "2", "--metric", "fs", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    diag = np.array(data["matrix_re"]).reshape(3, 3).diagonal()
    np.testing.assert_allclose(diag, [1.0, 0.5, 1.0], atol=1e-12)


def test_sff_writes_table(tmp_path, capsys):
    out = tmp_path / "sff.csv"
    assert run(["sff", "--k-list", "2,4", "--grid", "16,16",
                "--out", str(out), "--format", "csv"]) == 0
    assert "min_lambda" in out.read_text().splitlines()[0]
    assert "k=2" in capsys.readouterr().out


def test_bergman_field_csv(tmp_path):
    out = tmp_path / "rho.csv"
    assert run(["bergman", "--k", "4", "--epsilon", "0.05", "--grid", "16,16",
                "--out", str(out), "--format", "csv"]) == 0
    header = out.read_text().splitlines()[0]
    assert header.startswith("x,y,weight")


def test_sweep_report(tmp_path):
    out = tmp_path / "sweep.json"
    assert run(["sweep", "--k-list", "4:8", "--epsilon", "0.05",
                "--grid", "24,24", "--out", str(out)]) == 0
    rep = load_report(out)
    assert rep["kind"] == "bergman_sweep"
    assert len(rep["per_k"]) == 5


# -- round-trip ---------------------------------------------------------------

def test_ratio_report_round_trips_from_echo(tmp_path):
    out1 = tmp_path / "r1.json"
    assert run(["ratio", "--k-list", "2,4", "--samples", "4",
                "--grid", "16,16", "--seed", "31", "--out", str(out1),
                "--deterministic-reduction"]) == 0
    assert (tmp_path / "r1.samples.csv").exists()

    echoed = load_report(out1)["config"]
    cfg = tmp_path / "echo.toml"
    cfg.write_text(toml_dump(echoed))
    out2 = tmp_path / "r2.json"
    assert run(["ratio", "--config", str(cfg), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "r1.samples.csv").read_bytes() == \
        (tmp_path / "r2.samples.csv").read_bytes()
