"""
End-to-end tests for the designer command line.
Run with: pytest tests/test_cli.py
"""

import sys
import os
import io
import json

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.designs import complete_design, union_copies
from core.files import read_design, write_design
from designer import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_construct_writes_a_verified_design(tmp_path):
    path = tmp_path / "d.txt"
    code, out, _ = run("construct", "--family", "thm3_1", "--v", 8, "--out", path)
    assert code == 0
    assert "3-(16,5,18)" in out
    lines = path.read_text().splitlines()
    assert lines[1] == "# declare t=3 lambda=18 simple=true"
    assert lines[2] == "16 5 1008"
    assert read_design(str(path)).b == 1008


def test_construct_then_verify(tmp_path):
    path = tmp_path / "d.json"
    assert run("construct", "--family", "cor2k", "--v", 8, "--k", 3, "--out", path)[0] == 0
    code, out, _ = run("verify", path)
    assert code == 0
    assert "lambda_3: 18" in out
    assert "3-(16,6,18)" in out


def test_construct_writes_report(tmp_path, monkeypatch):
    monkeypatch.setenv("DESIGNS_OUTPUT_DIR", str(tmp_path / "reports"))
    code, out, _ = run("construct", "--family", "thm3_1", "--v", 8, "--out", tmp_path / "d.txt",
                       "--provenance", tmp_path / "p.json", "--report")
    assert code == 0
    assert (tmp_path / "reports" / "summary_report.txt").exists()
    assert json.loads((tmp_path / "p.json").read_text())["columns"] == ["h", "i", "j", "btype"]


def test_counts_prints_theta_delta_lambda():
    code, out, _ = run("counts", "--family", "thm_ab", "--v", 17, "--k", 3, "--z1", 1)
    assert code == 0
    assert "Theta*=9996 Delta*=9996 Lambda=0" in out


def test_counts_without_ingredient():
    code, out, _ = run("counts", "--family", "thm3_2", "--f", 5)
    assert code == 0
    assert "Theta=465 Delta=165 Lambda=300" in out


def test_parameter_errors_exit_2():
    code, _, err = run("counts", "--family", "thm3_1", "--v", 9)
    assert code == 2
    assert err.startswith("error[parameter]:")
    code, _, err = run("counts", "--family", "thm3_3", "--v", 32, "--m", 2)
    assert code == 2


def test_solve_ab():
    code, out, _ = run("solve-ab", "--v", 17, "--k", 3)
    assert code == 0
    assert "A=2912 B=182 ratio=16" in out
    assert "admissible z1: 1..8" in out


def test_verify_reports_non_simple_design(tmp_path):
    path = tmp_path / "doubled.txt"
    write_design(union_copies(complete_design(6, 3), 2), str(path))
    code, out, _ = run("verify", path)
    assert code == 1
    assert "not simple" in out


def test_verify_with_wrong_declaration_exits_1(tmp_path):
    path = tmp_path / "wrong.txt"
    write_design(complete_design(8, 5), str(path), declare={"t": 3, "lambda": 9})
    code, _, err = run("verify", path)
    assert code == 1
    assert err.startswith("error[verification]:")


def test_bad_file_exits_2(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("5 2 1\n0 7\n")
    code, _, err = run("verify", path)
    assert code == 2
    assert "error[format]: line 2:" in err


def test_unreadable_inputs_exit_2_without_a_traceback(tmp_path):
    code, _, err = run("verify", tmp_path / "missing.txt")
    assert code == 2
    assert err.startswith("error[io]:")

    accented = tmp_path / "accented.txt"
    accented.write_bytes(b"5 2 1\n0 1\xc3\xa9\n")
    code, _, err = run("verify", accented)
    assert code == 2
    assert err.startswith("error[format]: line 2:")

    scalar = tmp_path / "scalar.json"
    scalar.write_text('{"v": 5, "k": 2, "blocks": 7}')
    code, _, err = run("verify", scalar)
    assert code == 2
    assert err.startswith("error[format]:")


@pytest.mark.parametrize("argv,w", [
    (("baranyai", "--v", 9, "--k", 3), 28),
    (("orbits", "--v", 8, "--k", 3), 7),
    (("onefactor", "--v", 10), 9),
])
def test_generators_round_trip_through_resolve_check(tmp_path, argv, w):
    path = tmp_path / "r.txt"
    code, _, _ = run(*argv, "--out", path)
    assert code == 0
    assert (tmp_path / "r.txt.classes").exists()
    code, out, _ = run("resolve-check", path, "--classes", tmp_path / "r.txt.classes")
    assert code == 0
    assert f"{w} classes" in out


def test_resolve_check_failure_exits_1(tmp_path):
    path, classes = tmp_path / "r.txt", tmp_path / "r.classes"
    run("onefactor", "--v", 6, "--out", path, "--classes", classes)
    classes.write_text("0\n2\n5\n8\n11\n")
    code, _, err = run("resolve-check", path, "--classes", classes)
    assert code == 1
    assert err.startswith("error[resolution]:")


def test_resolve_build_refuses_filler_blocks(tmp_path):
    design, prov = tmp_path / "d.txt", tmp_path / "p.json"
    run("construct", "--family", "thm3_1", "--v", 8, "--out", design, "--provenance", prov)
    code, _, err = run("resolve-build", design, "--spec-from", prov, "--out", tmp_path / "r.json")
    assert code == 2
    assert "filler" in err
