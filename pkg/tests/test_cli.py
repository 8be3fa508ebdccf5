import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from quadpoints import cli
from quadpoints.trigpoly import TrigPoly2

C = TrigPoly2.cos


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


@pytest.fixture
def f_file(tmp_path, example_c):
    p = tmp_path / "f.json"
    p.write_text(example_c.to_json())
    return p


@pytest.fixture
def jet_file(tmp_path):
    p = tmp_path / "jet.json"
    rows = [{"j": 1, "k": 1, "c": 1.0}, {"j": 3, "k": 0, "c": 0.0},
            {"j": 0, "k": 3, "c": 0.0}, {"j": 3, "k": 1, "c": 1 / 3},
            {"j": 1, "k": 3, "c": -1 / 3}, {"j": 4, "k": 0, "c": 0.1},
            {"j": 0, "k": 4, "c": 0.2}]
    p.write_text(json.dumps({"coeffs": rows}))
    return p


def test_reproduce_c_json(capsys):
    code, out = run(capsys, "reproduce", "C", "--grid", "128")
    assert code == 0
    d = json.loads(out)
    assert d["count"] == 8 and d["passed"]
    assert d["classes"]["Lu"] == "2x(1,2)" and d["classes"]["Lv"] == "4x(1,1)"
    assert d["extra"]["intersection_bound"] == 8
    sig = [(r["s1"], r["s2"]) for r in d["solutions"]]
    assert sig == [(1, 1), (-1, 1), (-1, -1), (1, -1)] * 2


def test_reproduce_c_csv(capsys):
    code, out = run(capsys, "reproduce", "C", "--grid", "128", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == list(cli.CSV_COLUMNS)
    body = [r for r in rows[1:] if r and not r[0].startswith("#")]
    assert len(body) == 8
    pts = np.array([[float(r[0]), float(r[1])] for r in body])
    assert np.allclose(np.sort(np.unique(np.round(pts[:, 0], 9))),
                       np.round(np.arange(4) * np.pi / 2, 9))


def test_reproduce_c_svg(tmp_path, capsys):
    code, out = run(capsys, "reproduce", "C", "--grid", "128", "--format", "svg",
                    "--out", str(tmp_path))
    assert code == 0
    path = out.strip()
    svg = open(path).read()
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    # two L_u components and four L_v components
    assert svg.count("<path") == 6
    assert svg.count("<circle") == 8


def test_output_is_deterministic(capsys):
    outs = [run(capsys, "reproduce", "C", "--grid", "128")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    outs = [run(capsys, "reproduce", "A", "--seed", "3", "--grid", "128")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_reproduce_a(capsys):
    code, out = run(capsys, "reproduce", "A", "--seed", "7")
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert d["count"] <= 20 and d["count"] % 2 == 0
    assert d["seed"] == 7


def test_reproduce_b(capsys):
    code, out = run(capsys, "reproduce", "B", "--seed", "7")
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert d["count"] == 32


def test_dims(capsys):
    code, out = run(capsys, "dims")
    d = json.loads(out)
    assert code == 0
    e = d["extra"]
    assert (e["rank2"], e["rank4"], e["ideal4"]) == (9, 25, 19)
    assert e["moduli_from_functions"] == e["moduli_from_ideal"] == 15


def test_wilczynski_hyperboloid(capsys):
    code, out = run(capsys, "wilczynski", "--grid", "16")
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert d["extra"]["max_abs_a"] == 0.0 and d["extra"]["raw_det_sign"] == -1


def test_wilczynski_ruled(capsys):
    code, out = run(capsys, "wilczynski", "--surface", "builtin:ruled", "--grid", "16")
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert d["extra"]["max_abs_a"] > 0.1 and d["extra"]["max_abs_b"] < 1e-9


def test_wilczynski_unknown_surface(capsys):
    code, _ = run(capsys, "wilczynski", "--surface", "builtin:nothing", "--grid", "8")
    assert code == 1


def test_solve_and_trace(capsys, f_file):
    code, out = run(capsys, "solve", "--f", str(f_file), "--grid", "128")
    d = json.loads(out)
    assert code == 0 and d["count"] == 8
    code, out = run(capsys, "trace", "--f", str(f_file), "--grid", "128")
    d = json.loads(out)
    assert code == 0 and d["classes"]["Lv"] == "4x(1,1)"


def test_surface_sampling(capsys, f_file):
    code, out = run(capsys, "surface", "--f", str(f_file), "--eps", "0.01", "--sample", "4",
                    "--format", "csv")
    assert code == 0
    rows = [r for r in csv.reader(io.StringIO(out)) if r and not r[0].startswith("#")]
    assert rows[0][:2] == ["u", "v"]
    assert len(rows) == 17
    assert max(abs(float(r[-1])) for r in rows[1:]) < 1e-12


def test_normalform_quadratic(capsys, jet_file):
    code, out = run(capsys, "normalform", "--jet", str(jet_file))
    d = json.loads(out)
    assert code == 0
    assert d["extra"]["case"] == "quadratic"
    assert d["extra"]["signs"] == [1, -1]


def test_normalform_table_schema(tmp_path, capsys):
    table = np.zeros((5, 5))
    table[1, 1] = 1.0
    table[3, 0], table[0, 3] = 1 / 3, 1 / 3
    p = tmp_path / "t.json"
    p.write_text(json.dumps(table.tolist()))
    code, out = run(capsys, "normalform", "--jet", str(p))
    assert code == 0 and json.loads(out)["extra"]["case"] == "generic"


def test_exit_codes(tmp_path, capsys):
    zero = tmp_path / "zero.json"
    zero.write_text("[]")
    assert run(capsys, "solve", "--f", str(zero))[0] == 2
    cu = tmp_path / "cu.json"
    cu.write_text(C(1, 0).to_json())
    assert run(capsys, "trace", "--f", str(cu))[0] == 2
    assert run(capsys, "solve", "--f", str(tmp_path / "missing.json"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"x": 1}')
    assert run(capsys, "solve", "--f", str(bad))[0] == 1
    assert run(capsys, "reproduce", "C", "--eps-c", "0", "--grid", "64")[0] == 2
    with pytest.raises(SystemExit):
        cli.main(["reproduce", "D"])


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "quadpoints", "dims"], capture_output=True,
                       text=True, check=True)
    assert json.loads(r.stdout)["extra"]["rank4"] == 25
