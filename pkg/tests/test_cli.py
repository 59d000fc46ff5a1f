from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from main import EXIT_DEGENERATE, EXIT_INVALID, EXIT_OK, run

SMALL = ["--truncation", "96", "--rmax", "0.9"]
NBEST = ["nbest", "--n", "2", "--starts", "2", "--grid", "8x16", "--greedy-grid", "8x16", "--max-cycles", "5"]


def _read_csv(path):
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.reader(handle))


def test_poafd_writes_json_and_trace(tmp_path):
    out, trace = tmp_path / "poafd.json", tmp_path / "trace.csv"
    code = run(["poafd", "--n", "3", "--grid", "8x16", *SMALL, "--output", str(out), "--csv", str(trace)])
    assert code == EXIT_OK
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert set(doc) == {"space", "target", "config", "result"}
    assert doc["target"] == {"builtin": "f1"}
    assert len(doc["result"]["parameters"]) == 3
    rows = _read_csv(trace)
    assert rows[0] == ["step", "value"]
    values = [float(v) for _, v in rows[1:]]
    assert values == doc["result"]["objective_trace"]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_nbest_output_is_byte_identical_across_runs(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert run([*NBEST, *SMALL, "--target", "f3", "--output", str(first)]) == EXIT_OK
    assert run([*NBEST, *SMALL, "--target", "f3", "--output", str(second), "--workers", "2"]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    doc = json.loads(first.read_text(encoding="utf-8"))
    assert doc["result"]["diagnostics"]["method"] == "nbest"
    assert doc["config"]["seed"] == 0


def test_eval_reproduces_reported_residual(tmp_path, capsys):
    result, evaluated = tmp_path / "nbest.json", tmp_path / "eval.json"
    assert run([*NBEST, "--space", "bergman", "--alpha", "1", *SMALL, "--output", str(result)]) == EXIT_OK
    capsys.readouterr()
    assert run(["eval", "--input", str(result), "--output", str(evaluated)]) == EXIT_OK
    assert "differenza" in capsys.readouterr().out
    reported = json.loads(result.read_text(encoding="utf-8"))["result"]["residual_norm"]
    again = json.loads(evaluated.read_text(encoding="utf-8"))
    assert again["space"]["kind"] == "bergman"
    assert again["result"]["residual_norm"] == pytest.approx(reported, abs=1e-12)


def test_to_rational_from_result(tmp_path):
    result, rational = tmp_path / "nbest.json", tmp_path / "rational.json"
    assert run([*NBEST, *SMALL, "--target", "f2", "--output", str(result)]) == EXIT_OK
    assert run(["to-rational", "--input", str(result), "--output", str(rational)]) == EXIT_OK
    doc = json.loads(rational.read_text(encoding="utf-8"))
    assert len(doc["q"]) <= 3 and len(doc["p"]) <= 3
    assert set(doc["admissibility"]) >= {"admissible", "coprime", "zero_free", "degree_ok"}


def test_probe_dbvc_csv(tmp_path):
    path = tmp_path / "dbvc.csv"
    assert run(["probe", "dbvc", "--z", "0.2+0.1i", "--theta", "0.5", "--csv", str(path)]) == EXIT_OK
    rows = _read_csv(path)
    assert rows[0] == ["j", "radius", "value"]
    # 0.5, 0.75, ..., 1 - 2^-7 e poi r_max = 0.995
    assert len(rows) == 9
    assert float(rows[-1][1]) == pytest.approx(0.995)
    assert all(float(r) <= 0.995 for _, r, _ in rows[1:])


def test_probe_vanishing_with_fixed_parameters(tmp_path):
    out = tmp_path / "vanishing.json"
    code = run(["probe", "vanishing", *SMALL, "--target", "f4", "--params", "0", "--output", str(out)])
    assert code == EXIT_OK
    doc = json.loads(out.read_text(encoding="utf-8"))
    radii = np.array([row[1] for row in doc["values"]])
    assert radii.max() == pytest.approx(0.9)
    assert all(row[2] is None or row[2] >= 0.0 for row in doc["values"])


def test_check_lic(tmp_path):
    out = tmp_path / "lic.json"
    assert run(["check", "lic", *SMALL, "--params", "0", "0.5", "--output", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["passed"] is True
    assert doc["gram_min_eig"] == pytest.approx(1 - np.sqrt(0.75), abs=1e-9)


def test_bvc_command_near_pole_stays_within_rmax(tmp_path):
    target, out = tmp_path / "pole.json", tmp_path / "bvc.json"
    target.write_text(json.dumps({"target": {"rational": {"poles": [1.002], "residues": [1]}}}), encoding="utf-8")
    argv = ["probe", "bvc", "--truncation", "512", "--rmax", "0.995", "--input", str(target), "--output", str(out)]
    assert run(argv) == EXIT_OK
    rows = json.loads(out.read_text(encoding="utf-8"))["values"]
    r = np.array([row[1] for row in rows])
    values = np.array([row[2] for row in rows])
    assert r.max() == pytest.approx(0.995)
    exact = np.sqrt(1 - r**2) / np.abs(r - 1.002)
    # errore di troncamento relativo (r / 1.002)^512, al piu' 0.028 al raggio massimo
    np.testing.assert_allclose(values, exact, rtol=0.03)


def test_report_pdf(tmp_path):
    result, pdf = tmp_path / "poafd.json", tmp_path / "report" / "poafd.pdf"
    assert run(["poafd", "--n", "2", "--grid", "8x16", *SMALL, "--output", str(result)]) == EXIT_OK
    assert run(["report", "--input", str(result), "--output", str(pdf)]) == EXIT_OK
    assert pdf.read_bytes().startswith(b"%PDF")


def test_target_from_input_file(tmp_path):
    target, out = tmp_path / "target.json", tmp_path / "out.json"
    target.write_text(json.dumps({"target": {"taylor": [1, [0, 1], 0.25]}}), encoding="utf-8")
    assert run(["poafd", "--n", "1", "--grid", "8x16", *SMALL, "--input", str(target), "--output", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["target"] == {"taylor": [[1.0, 0.0], [0.0, 1.0], [0.25, 0.0]]}


@pytest.mark.parametrize(
    "argv",
    [
        ["poafd", "--grid", "2x2"],
        ["solve"],
        ["poafd", "--rho", "1.5", *SMALL],
        ["check", "lic", *SMALL, "--params", "0.95"],
        ["eval", *SMALL],
        ["to-rational", "--space", "bergman", *SMALL, "--params", "0.1", "0.2"],
        ["report"],
    ],
)
def test_invalid_input_exit_code(argv, capsys):
    assert run(argv) == EXIT_INVALID
    assert capsys.readouterr().err


def test_degenerate_system_exit_code(capsys):
    code = run(["eval", *SMALL, "--params", "0.3", "0.3+1e-12i"])
    assert code == EXIT_DEGENERATE
    assert "LIC" in capsys.readouterr().err


def test_help_exits_cleanly():
    assert run(["--help"]) == EXIT_OK


@pytest.mark.parametrize("field, value", [("residual_norm", [1, 2]), ("residual_norm", {"a": 1}), ("objective_trace", 3)])
def test_malformed_result_fields_exit_invalid(tmp_path, capsys, field, value):
    result, broken = tmp_path / "poafd.json", tmp_path / "broken.json"
    assert run(["poafd", "--n", "1", "--grid", "8x16", *SMALL, "--output", str(result)]) == EXIT_OK
    doc = json.loads(result.read_text(encoding="utf-8"))
    doc["result"][field] = value
    broken.write_text(json.dumps(doc), encoding="utf-8")
    capsys.readouterr()
    if field == "residual_norm":
        assert run(["eval", "--input", str(broken)]) == EXIT_INVALID
    assert run(["report", "--input", str(broken), "--output", str(tmp_path / "r.pdf")]) == EXIT_INVALID
    assert "result." in capsys.readouterr().err
