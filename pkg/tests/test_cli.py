import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from walklab.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def _close(a, b, path="$"):
    """Structural equality with a relative float tolerance."""
    if isinstance(a, dict):
        assert isinstance(b, dict) and a.keys() == b.keys(), path
        for k in a:
            _close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{path}[{i}]")
    elif isinstance(a, float) or isinstance(b, float):
        assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12), path
    else:
        assert a == b, path


@pytest.mark.parametrize("name,weights", [("m111", "1,1,1"), ("m211", "2,1,1"), ("m112", "1,1,2")])
def test_analyze_matches_golden(name, weights):
    code, text = run("analyze", "--motzkin", weights, "--exact")
    assert code == 0
    _close(json.loads(text), json.loads((GOLDEN / f"{name}.json").read_text()))


def test_analyze_from_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"steps": [{"jump": -1, "weight": 1}, {"jump": 0, "weight": 1}, {"jump": 1, "weight": 1}]}))
    code, text = run("analyze", "--steps", str(path), "--exact")
    assert code == 0
    report = json.loads(text)
    assert report["constants"]["rho"] == "1/3"
    assert report["regime"] == "zero drift"


def test_analyze_csv_agrees_with_json():
    _, j = run("analyze", "--motzkin", "1,1,1", "--exact")
    _, c = run("analyze", "--motzkin", "1,1,1", "--exact", "--out", "csv")
    table = dict(csv.reader(io.StringIO(c)))
    report = json.loads(j)
    assert table["constants.rho"] == "1/3"
    assert float(table["returns.sigma"]) == report["predictions"]["returns"]["params"]["sigma"]


def test_dist_json_and_csv_carry_the_same_numbers():
    _, j = run("dist", "--motzkin", "1,1,1", "--exact", "--stat", "returns", "--n", "2", "--out", "json")
    _, c = run("dist", "--motzkin", "1,1,1", "--exact", "--stat", "returns", "--n", "2", "--out", "csv")
    obj = json.loads(j)
    assert obj["probs"] == ["4/9", "4/9", "1/9"]
    rows = list(csv.reader(io.StringIO(c)))
    assert rows[0] == ["k", "probability"]
    assert [r[1] for r in rows[1:]] == obj["probs"]


def test_coeffs_excursions():
    code, text = run("coeffs", "--motzkin", "1,1,1", "--exact", "--family", "excursions", "--n-max", "6", "--out", "json")
    assert code == 0
    assert json.loads(text)["coefficients"] == ["1", "1", "2", "4", "9", "21", "51"]


def test_predict_and_scheme_check():
    code, text = run("predict", "--motzkin", "2,1,1", "--stat", "returns")
    assert code == 0
    obj = json.loads(text)
    assert obj["law"] == "geometric" and abs(obj["params"]["p"] - 0.25) < 1e-12
    code, text = run("scheme-check", "--motzkin", "1,1,1", "--app", "signchanges_bridges")
    assert code == 0 and json.loads(text)["verdict"] == "rayleigh_regime"


def test_converge_csv_default():
    code, text = run("converge", "--motzkin", "2,1,1", "--stat", "returns", "--n-list", "50,100")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["n", "d_n", "e_n", "m_n"]
    assert float(rows[2][1]) < float(rows[1][1])


def test_simulate_is_reproducible():
    args = ("simulate", "--motzkin", "1,1,1", "--n", "5", "--trials", "1000", "--seed", "4", "--stat", "height")
    assert run(*args) == run(*args)


def test_branches():
    code, text = run("branches", "--motzkin", "2,1,1", "--z", "0.25")
    assert code == 0
    obj = json.loads(text)
    assert abs(obj["small"][0]["re"] - 1) < 1e-12 and abs(obj["large"][0]["re"] - 2) < 1e-12


@pytest.mark.parametrize(
    "argv,code",
    [
        ([], 1),
        (["dist", "--motzkin", "1,1,1"], 1),  # missing required flags
        (["coeffs", "--family", "walks", "--n-max", "3"], 1),  # no step set
        (["analyze", "--motzkin", "1,x,1"], 1),
        (["dist", "--motzkin", "1,1,1", "--stat", "returns", "--n", "-2"], 1),
        (["analyze", "--steps", "/nonexistent/file.json"], 1),
        (["predict", "--steps", "-", "--stat", "returns"], None),  # stdin, filled in below
        (["analyze", "--motzkin", "1,0,1"], 2),  # periodic
        (["predict", "--motzkin", "1,1,1", "--stat", "bridge_signchanges"], 0),
        (["dist", "--motzkin", "1,1,1", "--stat", "bridge_signchanges", "--n", "3"], 0),
    ],
)
def test_exit_codes(argv, code, monkeypatch):
    if code is None:
        monkeypatch.setattr(sys, "stdin", io.StringIO('{"steps": [{"jump": -2, "weight": 1}, {"jump": 1, "weight": 1}]}'))
        code = 2  # periodic set on stdin
    assert run(*argv)[0] == code


def test_collision_is_reported():
    code, text = run("branches", "--motzkin", "1,1,1", "--z", "0.3333333333333333")
    assert code == 0 and json.loads(text)["collided"]


def test_numeric_failure_exit_code(monkeypatch):
    from walklab import cli
    from walklab.errors import NumericError

    def boom(*_):
        raise NumericError("extrapolation did not settle")

    monkeypatch.setattr(cli, "check_hypothesis", boom)
    assert run("scheme-check", "--motzkin", "1,1,1", "--app", "returns")[0] == 3


def test_unsupported_statistic_is_refused(tmp_path):
    path = tmp_path / "s.json"
    path.write_text('{"steps": [{"jump": -2, "weight": 1}, {"jump": 0, "weight": 1}, {"jump": 1, "weight": 1}]}')
    assert run("dist", "--steps", str(path), "--stat", "signchanges", "--n", "4")[0] == 2
    assert run("simulate", "--steps", str(path), "--n", "4", "--trials", "10", "--seed", "1", "--stat", "signchanges")[0] == 2
    assert run("analyze", "--steps", str(path))[0] == 0


def test_parse_error_location(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"steps": [\n  {"jump": -1, "weight": }\n]}')
    assert run("analyze", "--steps", str(path))[0] == 1
    assert f"{path}:2:" in capsys.readouterr().err


def test_exact_needs_rational_weights(tmp_path):
    path = tmp_path / "f.json"
    path.write_text('{"steps": [{"jump": -1, "weight": 0.5}, {"jump": 0, "weight": 1}, {"jump": 1, "weight": 0.5}]}')
    assert run("analyze", "--steps", str(path), "--exact")[0] == 1
    assert run("analyze", "--steps", str(path))[0] == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "walklab", "coeffs", "--motzkin", "1,1,1", "--family", "bridges", "--n-max", "4", "--exact", "--out", "json"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["coefficients"] == ["1", "1", "3", "7", "19"]
    proc = subprocess.run([sys.executable, "-m", "walklab"], capture_output=True, text=True, check=False)
    assert proc.returncode == 1 and "usage" in proc.stderr
