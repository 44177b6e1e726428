import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import tiny_space
from wcl import models, synthetic
from wcl.cli import main
from wcl.operator import MatrixOperator, WeightedComposition
from wcl.serialize import operator_to_dict


def dump(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


@pytest.fixture(scope="module")
def ex9_file(tmp_path_factory):
    T = models.example9_operator(50.0, 2000)
    return dump(tmp_path_factory.mktemp("ops") / "ex9.json", operator_to_dict(T))


def matrix_file(tmp_path, A, name="m.json"):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    T = MatrixOperator(tiny_space(A.shape[1]), tiny_space(A.shape[0]), A)
    return dump(tmp_path / name, operator_to_dict(T))


def test_build_example6_ok(tmp_path, capsys):
    X, Y = models.example6_spaces(10.0, 200)
    sym = models.example6_symbol(X, Y)
    args = ["build", dump(tmp_path / "x.json", X.to_dict()), dump(tmp_path / "y.json", Y.to_dict()),
            dump(tmp_path / "s.json", sym.to_dict())]
    code, doc = run(args, capsys)
    assert code == 0
    assert doc["backing"] == "wc" and doc["validation"]["verdict"] == "accepted"


def test_build_growing_weight_rejected(tmp_path, capsys):
    X, Y = models.line_spaces(20.0, 400)
    sym = models.growing_weight_symbol(X, Y)
    out = tmp_path / "rej.json"
    args = ["build", dump(tmp_path / "x.json", X.to_dict()), dump(tmp_path / "y.json", Y.to_dict()),
            dump(tmp_path / "s.json", sym.to_dict()), "--out", out]
    assert main([str(a) for a in args]) == 2
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "rejected" and doc["reason"] == "OutputNotC0"
    assert "witness_function" in doc["detail"]


def test_build_malformed_json_is_io_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["build", str(bad), str(bad), str(bad)]) == 1
    assert "wcl:" in capsys.readouterr().err


def test_missing_file_and_usage_errors(tmp_path, capsys):
    assert main(["check", "dp", str(tmp_path / "nope.json")]) == 1
    with pytest.raises(SystemExit) as ei:
        main(["check", "nonsense", "x"])
    assert ei.value.code == 1


def test_check_example9(ex9_file, capsys):
    assert run(["check", "dp", ex9_file], capsys)[0] == 0
    code, doc = run(["check", "isometry", ex9_file], capsys)
    assert code == 0 and doc["verdict"] == "isometry"
    assert run(["check", "proper", ex9_file], capsys)[0] == 0


def test_check_dp_failure_witness(tmp_path, capsys):
    code, doc = run(["check", "dp", matrix_file(tmp_path, [[1.0, 1.0]])], capsys)
    assert code == 2
    assert doc["verdict"] == "not_dp"
    w = doc["witnesses"][0]
    assert (w["f"], w["g"]) == ("e_0", "e_1")


def test_recover_example5(tmp_path, capsys):
    T = models.example5_operator(20.0, 400)
    code, doc = run(["recover", dump(tmp_path / "e5.json", operator_to_dict(T))], capsys)
    assert code == 0
    assert doc["Y1"] == models.example5_expected_y1(T.codomain).tolist()


def test_recover_zero_dp(tmp_path, capsys):
    code, doc = run(["recover", matrix_file(tmp_path, np.zeros((4, 3))), "--mode", "dp"], capsys)
    assert code == 0 and doc["Y3"] == [0, 1, 2, 3]


def test_recover_bijective(tmp_path, capsys):
    p = synthetic.bijective_dp(np.random.default_rng(4), 10)
    f = dump(tmp_path / "b.json", operator_to_dict(p.T))
    code, doc = run(["recover", f, "--mode", "bijective"], capsys)
    assert code == 0
    assert doc["symbol"]["phi"] == p.phi.tolist()
    assert doc["inverse"]["phi"] == np.argsort(p.phi).tolist()


def test_extend_example9_obstructed(ex9_file, capsys):
    code, doc = run(["extend", ex9_file, "--mode", "dp"], capsys)
    assert code == 0
    assert doc["verdict"] == "obstructed" and doc["certificate"]["limit_gap"] == 2.0


def test_extend_abs_symbol_extendable(tmp_path, capsys):
    T = models.example9_operator(20.0, 800, h=lambda y: np.ones_like(y))
    f = dump(tmp_path / "one.json", operator_to_dict(T))
    code, doc = run(["extend", f, "--mode", "isometric"], capsys)
    assert code == 0 and doc["verdict"] == "extendable"


def test_extend_nonproper_exit_2(tmp_path, capsys):
    X, Y = models.line_spaces(20.0, 400)
    T = WeightedComposition(X, Y, models.nonproper_symbol(X, Y))
    code, doc = run(["extend", dump(tmp_path / "np.json", operator_to_dict(T))], capsys)
    assert code == 2 and doc["reason"] == "NotProper"


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = dump(tmp_path / "cfg.json", {"tolerance": {"eps_tial": 1}})
    assert main(["check", "dp", matrix_file(tmp_path, [[1.0]]), "--config", cfg]) == 1


def test_gallery_example6_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["gallery", "example6", "--out", str(a)]) == 0
    assert main(["gallery", "example6", "--out", str(b)]) == 0
    ra = (a / "example6" / "report.json").read_bytes()
    assert ra == (b / "example6" / "report.json").read_bytes()
    doc = json.loads(ra)
    assert doc["quotient"]["passed"] and doc["open_map"]["verdict"] == "not_open"


def test_console_script_runs(tmp_path):
    f = matrix_file(tmp_path, [[1.0, 1.0]])
    res = subprocess.run([sys.executable, "-m", "wcl.cli", "check", "dp", f],
                         capture_output=True, text=True, env={"WCL_LOG": "debug", "PATH": ""})
    assert res.returncode == 2
    assert json.loads(res.stdout)["verdict"] == "not_dp"
