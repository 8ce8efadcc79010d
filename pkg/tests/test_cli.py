import csv
import json
import math
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from armastat.cli import main
from armastat.report import decode_matrix

DATA = Path(__file__).parent / "data"
GOLDEN = DATA / "golden"


def run(*argv):
    return main([str(a) for a in argv])


def write_model(path, **doc):
    path.write_text(json.dumps(doc))
    return path


def scalar_model(tmp_path, phi, thetas, **extra):
    return write_model(tmp_path / "m.json", m=1, d=1, p=1, q=len(thetas) - 1,
                       psi=[[[phi]]], theta=[[[t]] for t in thetas], **extra)


def _mask_numbers(s):
    return re.sub(r"[-+]?\d[\d.e+-]*i?", "#", s)


def assert_report_close(actual, expected, path="$"):
    if isinstance(expected, dict):
        assert set(actual) == set(expected), path
        for k in expected:
            if k == "reason":
                assert _mask_numbers(actual[k]) == _mask_numbers(expected[k]), path
            else:
                assert_report_close(actual[k], expected[k], f"{path}.{k}")
    elif isinstance(expected, list):
        assert isinstance(actual, list) and len(actual) == len(expected), path
        for i, (a, e) in enumerate(zip(actual, expected)):
            assert_report_close(a, e, f"{path}[{i}]")
    elif isinstance(expected, bool) or expected is None or isinstance(expected, str):
        assert actual == expected, path
    else:
        assert math.isclose(actual, expected, rel_tol=1e-8, abs_tol=1e-9), path


@pytest.mark.parametrize("name,order,code", [("unit_cancel", "1q", 2), ("unit_cancel", "pq", 2), ("heavy_mix", "1q", 0), ("heavy_mix", "pq", 0)])
def test_golden_reports(tmp_path, name, order, code, capsys):
    out = tmp_path / "r.json"
    assert run("analyze", DATA / f"{name}.json", "--order", order, "--json", out) == code
    assert_report_close(json.loads(out.read_text()), json.loads((GOLDEN / f"{name}_{order}.json").read_text()))


def test_counterexample_failing_conditions(tmp_path, capsys):
    for order, cond in (("1q", "condition_iii"), ("pq", "removability")):
        out = tmp_path / f"{order}.json"
        assert run("analyze", DATA / "unit_cancel.json", "--order", order, "--json", out) == 2
        assert json.loads(out.read_text())["failing_condition"] == cond
    assert "exists_strict: False" in capsys.readouterr().out


def test_report_round_trip(tmp_path, capsys):
    out = tmp_path / "r.json"
    run("analyze", DATA / "heavy_mix.json", "--json", out)
    doc = json.loads(out.read_text())
    assert json.loads(json.dumps(doc)) == doc
    assert set(doc["verdicts"]) == {"exists_strict", "unique", "exists_weak", "exists_causal", "boundary_uncertain"}
    assert all(v is not None for v in doc["verdicts"].values())
    B = decode_matrix(doc["blocks"][0]["B"])
    assert_allclose(B, [[1.0, -1.0]], atol=1e-12)


def test_stable_model_exit_zero(tmp_path, capsys):
    assert run("analyze", scalar_model(tmp_path, 0.5, [1.0, 0.3])) == 0


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("analyze", bad) == 1
    assert "error" in capsys.readouterr().err


def test_schema_violation(tmp_path, capsys):
    path = write_model(tmp_path / "m.json", m=1, d=1, p=1, q=0, psi=[[[0.5]]])
    assert run("analyze", path) == 1
    assert "theta" in capsys.readouterr().err


def test_dimension_mismatch(tmp_path, capsys):
    path = write_model(tmp_path / "m.json", m=2, d=1, p=1, q=0, psi=[[[0.5]]], theta=[[[1.0]]])
    assert run("analyze", path) == 1


def test_complex_scalars_and_tolerance_flags(tmp_path, capsys):
    path = scalar_model(tmp_path, [0.0, 0.5], [1.0])
    out = tmp_path / "r.json"
    assert run("analyze", path, "--tol-circle", "1e-6", "--json", out) == 0
    doc = json.loads(out.read_text())
    assert doc["tolerances"]["circle"] == 1e-6
    assert doc["blocks"][0]["eigenvalue"] == [0.0, 0.5]


def test_boundary_uncertain_exit(tmp_path, capsys):
    assert run("analyze", scalar_model(tmp_path, 1.0 + 1e-12, [1.0])) == 3
    assert "alternative branch" in capsys.readouterr().out


def test_laurent_csv(tmp_path, capsys):
    out = tmp_path / "l.csv"
    assert run("laurent", scalar_model(tmp_path, 0.5, [1.0]), "--jmin", "0", "--jmax", "6", "--csv", out) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["j", "norm", "re(M_11)", "im(M_11)"]
    assert_allclose([float(r[2]) for r in rows[1:]], 0.5 ** np.arange(7), atol=1e-12)


def test_laurent_single_row(tmp_path, capsys):
    assert run("laurent", scalar_model(tmp_path, 0.5, [2.0, 1.0]), "--jmin", "0", "--jmax", "0") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert float(lines[1].split(",")[2]) == pytest.approx(2.0)


def test_laurent_not_removable(capsys):
    assert run("laurent", DATA / "unit_cancel.json") == 2
    assert "not removable" in capsys.readouterr().err


def test_simulate_csv_and_summary(tmp_path, capsys):
    out = tmp_path / "p.csv"
    model = scalar_model(tmp_path, 0.5, [1.0, 0.3])
    assert run("simulate", model, "--T", "50", "--J", "60", "--seed", "3", "--csv", out) == 0
    err = capsys.readouterr().err
    resid = float(re.search(r"residual over t >= \d+: (\S+);", err).group(1))
    assert resid < 1e-6
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "re(Y_1)", "im(Y_1)"]
    assert len(rows) == 51
    first = out.read_text()
    run("simulate", model, "--T", "50", "--J", "60", "--seed", "3", "--csv", out)
    assert out.read_text() == first


def test_simulate_deterministic_noise_is_constant(tmp_path, capsys):
    path = scalar_model(tmp_path, 0.5, [1.0], noise={"L": [[0.0]], "c": [1.0]})
    assert run("simulate", path, "--T", "20", "--J", "10") == 0
    values = {line.split(",")[1] for line in capsys.readouterr().out.strip().splitlines()[1:]}
    assert values == {repr(2.0)}


def test_simulate_without_solution(capsys):
    assert run("simulate", DATA / "unit_cancel.json") == 2


def test_coprime(tmp_path, capsys):
    assert run("coprime", DATA / "unit_cancel.json") == 2
    assert "left-coprime: False" in capsys.readouterr().out
    assert run("coprime", scalar_model(tmp_path, 0.5, [1.0])) == 0
    square = write_model(tmp_path / "sq.json", m=2, d=2, p=1, q=1, psi=[[[0.5, 0.0], [0.0, 0.2]]],
                         theta=[[[1, 0], [0, 1]], [[-0.5, 0.0], [0.0, -0.2]]])
    assert run("coprime", square) == 2


def test_causal(tmp_path, capsys):
    assert run("causal", scalar_model(tmp_path, 0.5, [1.0])) == 0
    assert run("causal", scalar_model(tmp_path, 2.0, [1.0])) == 2
    assert run("causal", DATA / "unit_cancel.json") == 2
    assert "not_applicable" in capsys.readouterr().out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "armastat.cli", "coprime", str(DATA / "unit_cancel.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "gcld determinant degree" in proc.stdout
