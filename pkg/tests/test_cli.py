import json
import subprocess
import sys

import numpy as np
import pytest
import sympy as sp

from affdyn.cli import run
from affdyn.construct import construct_example, default_budget
from affdyn.density import DENSE
from affdyn.pipeline import analyze_hypercyclicity
from affdyn.serialize import decode_scalar, dumps, encode_scalar
from affdyn.specfile import SpecError, load_spec, parse_spec

TRANSLATION = {"n": 1, "generators": [{"A": [[1]], "a": [1]}]}


@pytest.fixture
def write(tmp_path):
    def _write(obj, name="spec.json"):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return path

    return _write


def test_analyze_translation(write, tmp_path):
    out = tmp_path / "report.json"
    assert run(["analyze", str(write(TRANSLATION)), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["m"] == 1
    assert report["verdict"]["status"] == "NotDense"
    assert report["verdict"]["reason"] == "CountBound"


def test_simulate_translation_csv(write, tmp_path):
    out = tmp_path / "orbit.csv"
    assert run(["simulate", str(write(TRANSLATION)), "--budget", "3", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 1 + 4
    cov = json.loads((tmp_path / "orbit.coverage.json").read_text())
    assert cov["words"] == 4 and 0 <= cov["coverage"] < 0.05


def test_simulate_to_stdout(write, capsys):
    assert run(["simulate", str(write(TRANSLATION)), "--budget", "2"]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == "m1,re1,im1"
    assert json.loads(captured.err)["words"] == 3


def test_malformed_json_reports_position(write, capsys):
    assert run(["analyze", str(write('{"n": 1,\n "generators": [}'))]) == 1
    assert "line 2" in capsys.readouterr().err


def test_non_commuting_reports_pair(write, capsys):
    spec = {"n": 1, "generators": [{"A": [[2]], "a": [0]}, {"A": [[1]], "a": [1]}]}
    assert run(["analyze", str(write(spec))]) == 1
    assert "generators 0 and 1" in capsys.readouterr().err


def test_missing_file_is_input_error(tmp_path):
    assert run(["analyze", str(tmp_path / "nope.json")]) == 1


def test_bad_box_option(write):
    with pytest.raises(SystemExit):
        run(["simulate", str(write(TRANSLATION)), "--box", "1,-1"])


def test_refute_translation(write, tmp_path):
    out = tmp_path / "refute.json"
    code = run(["refute", str(write(TRANSLATION)), "--k", "2", "--trials", "3",
                "--budget", "20", "--epsilon", "0.25", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["trials"] == 3 and report["passed"]


def test_analyze_is_byte_deterministic(write, tmp_path):
    # both maps fix the point 0.5
    spec = {"n": 1, "generators": [{"A": [[[0.9, 0.3]]], "a": [[0.05, -0.15]]},
                                   {"A": [[[1.1, -0.2]]], "a": [[-0.05, 0.1]]}]}
    path = write(spec)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["analyze", str(path), "--simulate", "--budget", "30", "--out", str(a)])
    run(["analyze", str(path), "--simulate", "--budget", "30", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_exact_mode_needs_exact_input(write):
    spec = {"n": 1, "generators": [{"A": [[2.5]], "a": [0]}]}
    assert run(["analyze", str(write(spec)), "--mode", "exact"]) == 1


def test_construct_example_command(tmp_path):
    out = tmp_path / "ex.json"
    assert run(["construct-example", "--n", "1", "--out", str(out)]) == 0
    spec = load_spec(out)
    assert spec.n == 1 and len(spec.generators) == 2
    assert run(["construct-example", "--n", "5"]) == 1


def test_module_entry_point(write):
    proc = subprocess.run(
        [sys.executable, "-m", "affdyn", "analyze", str(write(TRANSLATION))],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["m"] == 1


def test_flags_resolve_to_algebraic_numbers():
    spec = parse_spec({
        "n": 1, "arithmetic": "exact",
        "flags": {"s2": {"minpoly": "x**2 - 2", "root": -1.4}},
        "generators": [{"A": [["exp(s2)"]], "a": [0]}],
    })
    assert sp.simplify(spec.generators[0].linear[0, 0] - sp.exp(-sp.sqrt(2))) == 0


def test_reducible_flag_rejected():
    with pytest.raises(SpecError):
        parse_spec({"n": 1, "flags": {"t": {"minpoly": "x**2 - 4", "root": 2}},
                    "generators": [{"A": [[1]], "a": [1]}]})


def test_exact_spec_rejects_float():
    with pytest.raises(SpecError):
        parse_spec({"n": 1, "arithmetic": "exact", "generators": [{"A": [[0.5]], "a": [0]}]})


def test_undeclared_symbol_rejected():
    with pytest.raises(SpecError):
        parse_spec({"n": 1, "arithmetic": "exact", "generators": [{"A": [["exp(q)"]], "a": [0]}]})


def test_scalar_round_trip():
    for z in (1.5 - 2j, 0.1 + 0j):
        assert decode_scalar(encode_scalar(z), exact=False) == z
    x = sp.Rational(1, 3) + sp.I * sp.pi / 2
    assert sp.simplify(decode_scalar(encode_scalar(x), exact=True) - x) == 0


def test_dumps_float_format():
    text = dumps({"x": 0.1, "y": float("nan"), "z": [1, 2.0]})
    obj = json.loads(text)
    assert obj == {"x": 0.1, "y": None, "z": [1, 2.0]}
    assert "0.10000000000000001" in text


def test_construct_example_seed_zero():
    spec = construct_example(1)
    vals = [complex(f.linear[0, 0]) for f in spec.generators]
    assert np.allclose(vals[0], np.exp(0.1 + 2j * np.pi * np.sqrt(3)))
    assert np.allclose(vals[1], np.exp(-0.1 * np.sqrt(2) + 2j * np.pi * np.sqrt(5)))
    assert spec.budget == default_budget(2) == 139
    again = parse_spec(json.loads(spec.dumps()))
    report = analyze_hypercyclicity(again.generators, mode="exact")
    assert report.m == 3 and report.verdict.status == DENSE


def test_construct_example_other_seed():
    a = construct_example(1, seed=3)
    report = analyze_hypercyclicity(a.generators, mode="exact")
    assert report.verdict.status == DENSE
    assert a.dumps() != construct_example(1).dumps()
