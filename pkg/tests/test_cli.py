import csv
import io
import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from tavis_lab.cli import fmt_float, main

SCHEMA = json.loads(resources.files("tavis_lab").joinpath("schema/result.v1.json").read_text())

COMMANDS = [
    ["spectrum", "--r", "1", "--c", "1"],
    ["spectrum", "--r", "25/2", "--c", "127.5", "--beta", "3", "--method", "oracle"],
    ["spectrum", "--r", "25", "--c", "2500", "--method", "diffeq"],
    ["spectrum", "--r", "5", "--c", "-2", "--beta", "2", "--method", "detuned"],
    ["spectrum", "--r", "10", "--c", "5", "--method", "avgtlm"],
    ["eigvec", "--r", "12.5", "--c", "127.5", "--j", "0"],
    ["eigvec", "--r", "127.5", "--c", "-102.5", "--j", "0", "--method", "modtlm"],
    ["sweep", "--r", "2", "--vary", "c", "--start", "-2", "--stop", "10", "--step", "1", "--jlist", "0,1"],
    ["sweep", "--r", "12.5", "--c", "127.5", "--vary", "beta", "--start", "0", "--stop", "200", "--step", "50"],
    ["dicke", "--N", "20", "--beta-t", "0.5", "--m", "2"],
    ["dynamics", "--N", "2", "--t-max", "5", "--samples", "11"],
    ["dynamics", "--N", "1", "--field", "coherent", "--alpha", "1", "--cutoff", "10", "--observable", "eminus",
     "--samples", "5"],
    ["validity", "--r", "127.5", "--c", "-102.5", "--kappa", "0.1"],
]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: " ".join(a[:5]))
def test_json_validates_and_is_deterministic(argv, capsys):
    code, first, _ = run(argv, capsys)
    assert code == 0
    doc = json.loads(first)
    jsonschema.validate(doc, SCHEMA)
    assert doc["command"] == argv[0]
    _, second, _ = run(argv, capsys)
    assert first == second


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: " ".join(a[:5]))
def test_csv_is_lf_and_parses(argv, capsys):
    code, out, _ = run(argv + ["--format", "csv"], capsys)
    assert code == 0 and "\r" not in out and out.endswith("\n")
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) >= 2 and all(len(r) == len(rows[0]) for r in rows)


def test_subprocess_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"o{k}.json"
        subprocess.run([sys.executable, "-m", "tavis_lab", "sweep", "--r", "12.5", "--vary", "c",
                        "--start", "-12.5", "--stop", "37.5", "--step", "5", "--jlist", "0,2",
                        "--parallelism", "2", "--out", str(path)], check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_spectrum_examples(capsys):
    _, out, _ = run(["spectrum", "--r", "1", "--c", "1", "--beta", "0"], capsys)
    res = json.loads(out)["result"]
    assert np.allclose(res["q"], [math.sqrt(6), 0, -math.sqrt(6)], atol=1e-12)
    assert res["r2"] == 2 and res["dim"] == 3
    _, out, _ = run(["spectrum", "--r", "0.5", "--c", "1.5"], capsys)
    assert np.allclose(json.loads(out)["result"]["q"], [math.sqrt(2), -math.sqrt(2)])
    _, out, _ = run(["spectrum", "--r", "25", "--c", "2500", "--method", "avgfield"], capsys)
    q = json.loads(out)["result"]["q"]
    assert len(q) == 51 and np.allclose(np.diff(q), -100)


def test_halfint_echo(capsys):
    _, out, _ = run(["spectrum", "--r", "25/2", "--c", "12.5"], capsys)
    r = json.loads(out)["params"]["r"]
    assert r == {"doubled": 25, "decimal": "12.5", "fraction": "25/2"}


@pytest.mark.parametrize("r,c", [("25", "2500"), ("12.5", "127.5"), ("127.5", "-102.5")])
def test_eigvec_rows(r, c, capsys):
    _, out, _ = run(["eigvec", "--r", r, "--c", c, "--j", "0", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    data = [row for row in rows if row["row"] != "meta"]
    meta = [row for row in rows if row["row"] == "meta"]
    from tavis_lab.qnum import BlockSpec
    assert len(data) == BlockSpec(r, c).dim and len(meta) == 1
    assert sum(float(row["abs2"]) for row in data) == pytest.approx(1)


def test_sweep_sqrt_growth(capsys):
    _, out, _ = run(["sweep", "--r", "12.5", "--vary", "c", "--start", "-12.5", "--stop", "250",
                     "--step", "1", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    tail = [(float(x["c"]), float(x["q_exact"])) for x in rows if float(x["c"]) >= 125]
    c, q = np.array(tail).T
    assert abs(np.polyfit(np.log(c), np.log(q), 1)[0] - 0.5) <= 0.05


def test_sweep_beta_decoupling(capsys):
    thr = math.sqrt(4 * 127.5)
    _, out, _ = run(["sweep", "--r", "12.5", "--c", "127.5", "--vary", "beta", "--start", "0",
                     "--stop", str(12 * thr), "--step", str(thr), "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    w = np.array([float(x["max_weight"]) for x in rows])
    b = np.array([float(x["beta"]) for x in rows])
    assert w[0] < 0.9 and np.all(np.diff(w) > 0)
    assert np.all(w[b >= 11 * thr] > w[b <= thr].max())


def test_sweep_symmetry(capsys):
    _, out, _ = run(["sweep", "--r", "2", "--vary", "c", "--start", "3", "--stop", "3", "--step", "1",
                     "--jlist", "0,1,2,3,4", "--format", "csv"], capsys)
    q = [float(x["q_exact"]) for x in csv.DictReader(io.StringIO(out))]
    assert np.allclose(q, [-v for v in q[::-1]], atol=1e-10)


def test_dicke_examples(capsys):
    _, out, _ = run(["dicke", "--N", "4", "--beta-t", "0"], capsys)
    assert json.loads(out)["result"]["closed"]["m_mean"] == 0
    _, out, _ = run(["dicke", "--N", "4", "--m", "0"], capsys)
    assert json.loads(out)["result"]["closed"]["r_r1_mean"] == 2
    _, out, _ = run(["dicke", "--N", "20", "--beta-t", "0.5", "--m", "1"], capsys)
    assert json.loads(out)["result"]["agree"] is True


def test_dynamics_examples(capsys):
    _, out, _ = run(["dynamics", "--N", "1", "--t-max", "6", "--samples", "61"], capsys)
    res = json.loads(out)["result"]
    t = np.array(res["t"])
    assert abs(res["value"][0]) <= 1e-12 and np.allclose(res["value"], np.sin(t) ** 2, atol=1e-10)
    _, fast, _ = run(["dynamics", "--N", "2", "--path", "superradiant", "--t-max", "20", "--samples", "50"], capsys)
    _, slow, _ = run(["dynamics", "--N", "2", "--t-max", "20", "--samples", "50"], capsys)
    assert np.allclose(json.loads(fast)["result"]["value"], json.loads(slow)["result"]["value"], atol=1e-10)


def test_validity_examples(capsys):
    _, out, _ = run(["validity", "--r", "0.5", "--c", "1.5", "--kappa", "0.001"], capsys)
    assert json.loads(out)["result"]["doubling"]["satisfied"] is True
    _, out, _ = run(["validity", "--r", "127.5", "--c", "-102.5", "--kappa", "0.1"], capsys)
    res = json.loads(out)["result"]
    assert res["doubling"]["satisfied"] is False
    assert res["thresholds"]["beta_low_c"] > 0 and res["thresholds"]["beta_high_c"] >= 0


@pytest.mark.parametrize("argv,code", [
    (["spectrum", "--r", "1.3", "--c", "1"], 2),
    (["spectrum", "--r", "1", "--c", "-2"], 2),
    (["spectrum", "--r", "1", "--c", "1", "--method", "nope"], 2),
    (["nope"], 2),
    (["spectrum", "--r", "1", "--c", "1", "--beta", "nan"], 2),
    (["dynamics", "--N", "12"], 2),
])
def test_exit_codes(argv, code, capsys):
    assert run(argv, capsys)[0] == code


def test_numerical_failure_exit_code(monkeypatch, capsys):
    from tavis_lab import cli
    from tavis_lab.exact import NumericalError

    def boom(cfg):
        raise NumericalError("residual", residual=1.0)

    monkeypatch.setitem(cli.COMMANDS, "spectrum", boom)
    code, _, err = run(["spectrum", "--r", "1", "--c", "1"], capsys)
    assert code == 3 and "numerical" in err


def test_out_file(tmp_path, capsys):
    path = tmp_path / "x.csv"
    assert main(["spectrum", "--r", "1", "--c", "1", "--format", "csv", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert path.read_bytes().startswith(b"j,q,lambda\n")


def test_float_format():
    assert fmt_float(-0.0) == "0"
    assert fmt_float(0.1) == "0.10000000000000001"
    with pytest.raises(ArithmeticError):
        fmt_float(float("nan"))
