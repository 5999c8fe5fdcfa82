import csv
import json
from pathlib import Path

import pytest

from dirackit.cli import EXIT_CHECK, EXIT_OK, EXIT_SCHEMA, EXIT_USAGE, main

SPECS = Path(__file__).resolve().parents[1] / "specs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name, code", [
    ("partial_certified.json", EXIT_OK),
    ("symplectic_plane.json", EXIT_OK),
    ("partial_biannihilator.json", EXIT_CHECK),
    ("separation_counterexample.json", EXIT_CHECK),
    ("bad_dimension.json", EXIT_SCHEMA),
])
def test_verify_exit_codes(capsys, name, code):
    assert run(capsys, "verify", SPECS / name)[0] == code


def test_verify_report_contents(capsys):
    code, out, _ = run(capsys, "verify", SPECS / "symplectic_plane.json")
    rep = json.loads(out)
    assert rep["status"] == "Certified"
    assert rep["classification"]["contradictions"] == []
    assert rep["kernel_report"]["ok"]


def test_schema_error_names_the_location(capsys, tmp_path):
    spec = tmp_path / "bad.json"
    spec.write_text(json.dumps({"space": {"dimE": 0}, "construct": {"kind": "graph_flat"}}))
    code, _, err = run(capsys, "verify", spec)
    assert code == EXIT_SCHEMA
    assert "/space/dimE" in err


def test_unknown_key_is_a_schema_error(capsys, tmp_path):
    spec = tmp_path / "extra.json"
    spec.write_text(json.dumps({"space": {"dimE": 2}, "construct": {"kind": "graph_flat"}, "colour": 1}))
    assert run(capsys, "verify", spec)[0] == EXIT_SCHEMA


def test_malformed_json_and_missing_file(capsys, tmp_path):
    spec = tmp_path / "broken.json"
    spec.write_text("{not json")
    assert run(capsys, "verify", spec)[0] == EXIT_USAGE
    assert run(capsys, "verify", tmp_path / "absent.json")[0] == EXIT_USAGE


def test_construct_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "construct", SPECS / "partial_certified.json", "--out", a)[0] == EXIT_OK
    assert run(capsys, "construct", SPECS / "partial_certified.json", "--out", b)[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_bracket_command(capsys):
    code, out, _ = run(capsys, "bracket", SPECS / "courant_bracket.json", "--at", "0.5,1,2")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["forms_agreement"]["corrected"] <= 1e-10


def test_bracket_point_must_match_dimension(capsys):
    assert run(capsys, "bracket", SPECS / "courant_bracket.json", "--at", "1,2")[0] == EXIT_USAGE


@pytest.mark.parametrize("name, code, verdict", [
    ("rolling_disk_distribution.json", EXIT_CHECK, "NotInvolutive"),
    ("closed_distribution.json", EXIT_OK, "Involutive"),
    ("nonclosed_two_form.json", EXIT_CHECK, "NotInvolutive"),
    ("constant_poisson.json", EXIT_OK, "Involutive"),
])
def test_involutivity(capsys, name, code, verdict):
    got, out, _ = run(capsys, "involutivity", SPECS / name, "--samples", "6")
    assert got == code
    assert json.loads(out)["verdict"] == verdict


def test_simulate_lc_writes_csv_and_report(capsys, tmp_path):
    spec = json.loads((SPECS / "lc_circuit.json").read_text())
    spec["T"] = 0.1
    path = tmp_path / "lc.json"
    path.write_text(json.dumps(spec))
    out_csv, out_rep = tmp_path / "lc.csv", tmp_path / "report.json"
    code, _, _ = run(capsys, "simulate", path, "--out", out_csv, "--report", out_rep)
    assert code == EXIT_OK
    rows = list(csv.reader(out_csv.open()))
    assert rows[0][0] == "t" and len(rows) == 102
    rep = json.loads(out_rep.read_text())
    assert rep["ok"] and rep["diagnostics"]["steps"] == 100


def test_simulate_inadmissible_start(capsys, tmp_path):
    spec = {"name": "rolling-disk", "z0": [0, 0, 0, 0, 0, 0, 1, 0.5], "h": 0.01, "T": 0.05}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(spec))
    code, _, err = run(capsys, "simulate", path)
    assert code == EXIT_USAGE
    assert "project_state" in err


def test_limits(capsys):
    for name in ("ascending_block_symplectic.json", "projective_product.json"):
        code, out, _ = run(capsys, "limits", SPECS / name)
        rep = json.loads(out)
        assert code == EXIT_OK
        assert rep["validation"]["valid"] and rep["coherence"]["coherent"]


def test_tolerance_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DIRACKIT_TOL", "1e-6")
    _, out, _ = run(capsys, "verify", SPECS / "symplectic_plane.json")
    assert json.loads(out)["tolerance"] == 1e-6
    monkeypatch.setenv("DIRACKIT_TOL", "tiny")
    assert run(capsys, "verify", SPECS / "symplectic_plane.json")[0] == EXIT_USAGE
