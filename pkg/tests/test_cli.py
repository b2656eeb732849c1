from __future__ import annotations

import json
import subprocess
import sys

import pytest

from fgl_forge.cli import SCHEMA, main


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        import io
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fgl_three_series_table(capsys):
    code, out, _ = run(capsys, "fgl", "--p", "2", "--n", "1", "--kind", "K", "--T", "8", "--l", "3")
    assert code == 0
    assert "[3](u) = u + v1*u^2 + v1^2*u^3 + v1^3*u^4 + v1^4*u^5 + v1^5*u^6 + O(u^8)" in out
    assert "x^1 y^1  v1" in out
    assert out.rstrip().endswith("PASS")


def test_cyclic_rank_two(capsys):
    code, out, _ = run(capsys, "cyclic", "--l", "6", "--p", "2", "--n", "1")
    assert code == 0
    assert "(rank 2)" in out and "u^2 = 0" in out


def test_upowers_pass(capsys):
    code, out, _ = run(capsys, "bounds", "upowers", "--p", "2", "--h", "1", "--a", "2", "--T", "20")
    assert code == 0
    assert "factorization mod I_1, T = 20: PASS" in out


def test_json_schema(capsys):
    code, out, _ = run(capsys, "bounds", "lens", "--p", "2", "--q", "3", "--s", "1", "--heights", "1,2",
                       "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == SCHEMA
    assert (doc["report"]["C"], doc["report"]["r_min"]) == (6, 36)


def test_euler_and_injectivity(capsys):
    code, out, _ = run(capsys, "euler", "--p", "2", "--r", "2", "--weights", "2,1", "--T", "10",
                       "--rank", "2", "--filtration", "0,1", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["report"]["leading_form"]["k"] == 3
    assert doc["certificates"]["kernel_empty"] is True


def test_kernel_model_from_file(capsys, tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"p": 2, "heights": [1, 2], "weights": [1], "A": 4, "q": 2,
                                "connecting": [{"src": 0, "tgt": 1, "terms": [[4, "v2"]]}]}))
    code, out, _ = run(capsys, "bounds", "kernel", str(path))
    assert code == 0 and "kernel vanishes mod u^4: True" in out


def test_morse_from_stdin(capsys, monkeypatch):
    doc = {"components": [
        {"name": "s", "generator_degrees": [0], "morse_index": 0, "normal_weights": [1], "moment_value": "0"},
        {"name": "n", "generator_degrees": [0], "morse_index": 2, "normal_weights": [-1], "moment_value": "1"}]}
    code, out, _ = run(capsys, "morse", "--m-max", "3", stdin=json.dumps(doc), monkeypatch=monkeypatch)
    assert code == 0 and "rank 2, generator degrees [0, 2]" in out


def test_failed_certificate_exits_one(capsys, monkeypatch):
    doc = {"components": [
        {"name": "s", "generator_degrees": [0], "morse_index": 2, "normal_weights": [1], "moment_value": "0"}]}
    code, out, _ = run(capsys, "morse", "--m-max", "2", stdin=json.dumps(doc), monkeypatch=monkeypatch)
    assert code == 1
    assert "check s_index_matches_weights: FAIL" in out


@pytest.mark.parametrize("stdin,needle", [
    ('{"components": [\n  {"name": "a"', "line 2, column 15"),
    ('{"components": [{"name": "a", "generator_degrees": [0], "morse_index": 0, "moment_value": "1"}]}',
     "components[0]: missing field 'normal_weights'"),
    ('{"components": [{"name": "a", "generator_degrees": [0], "morse_index": 0, "normal_weights": [0],'
     ' "moment_value": "1"}]}', "components[0]: a: normal weights must be nonzero"),
])
def test_input_diagnostics(capsys, monkeypatch, stdin, needle):
    code, _, err = run(capsys, "morse", stdin=stdin, monkeypatch=monkeypatch)
    assert code == 2
    assert needle in err


def test_kernel_model_diagnostics(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"p": 2, "heights": [1], "weights": [1], "A": 3, "q": 1,
                                "connecting": [{"src": 0, "terms": []}]}))
    code, _, err = run(capsys, "bounds", "kernel", str(path))
    assert code == 2 and "connecting[0]: missing field 'tgt'" in err


def test_parameter_errors(capsys):
    assert run(capsys, "fgl", "--p", "4", "--T", "5")[0] == 2
    code, _, err = run(capsys, "euler", "--p", "2", "--weights", "2,x", "--T", "4")
    assert code == 2 and "--weights" in err
    code, _, err = run(capsys, "fgl", "--p", "2", "--T", "5", "--kind", "Z")
    assert code == 2 and "--kind" in err


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "fgl_forge.cli", *args], capture_output=True, check=False)


def test_jobs_do_not_change_output():
    a = _cli("fgl", "--p", "3", "--n", "1", "--r", "2", "--T", "12", "--l", "2,3,4,9", "--format", "json")
    b = _cli("fgl", "--p", "3", "--n", "1", "--r", "2", "--T", "12", "--l", "2,3,4,9", "--format", "json",
             "--jobs", "3")
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout
