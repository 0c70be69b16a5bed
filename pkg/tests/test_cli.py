from __future__ import annotations

import csv
import io

import pytest

from qbplab.builders import build_disj_obdd, build_mws_qbp
from qbplab.cli import fmt, fmt_sci, main
from qbplab.io import load_file, save_file


@pytest.fixture
def graphs(tmp_path):
    mws4 = tmp_path / "mws_n4.qbp.json"
    disj2 = tmp_path / "disj2.qbp.json"
    save_file(build_mws_qbp(4), mws4)
    save_file(build_disj_obdd(2), disj2)
    return {"mws4": str(mws4), "disj2": str(disj2), "dir": tmp_path}


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_number_formats():
    assert fmt(1.0) == "1" and fmt(0.0) == "0"
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt_sci(0.0) == "0.0e0" and fmt_sci(2.5e-16) == "2.5e-16"


def test_verify_mws_n4(capsys, graphs):
    code, out, _ = call(capsys, "verify", "--graph", graphs["mws4"], "--function", "mws")
    assert code == 0
    assert out.startswith("PASS worst_error=0.0e0")


def test_verify_failure_exit_code(capsys, graphs):
    code, out, _ = call(capsys, "verify", "--graph", graphs["disj2"], "--function", "mws")
    assert code == 1 and out.startswith("FAIL")


def test_run_disj2(capsys, graphs):
    code, out, _ = call(capsys, "run", "--graph", graphs["disj2"], "--input", "1110")
    assert code == 0 and out == "p0=1 p1=0 residual=0\n"


def test_ic_xor(capsys):
    code, out, _ = call(capsys, "ic", "--protocol", "xor")
    fields = dict(kv.split("=") for kv in out.split())
    assert code == 0
    assert float(fields["ic"]) == 0 and fields["ok"] == "true"


def test_ic_classical_and_random(capsys):
    code, out, _ = call(capsys, "ic", "--protocol", "and-classical")
    assert code == 0 and "ic=1 " in out and "epsilon=0 " in out
    code, out, _ = call(capsys, "ic", "--protocol", "random:3")
    assert code == 0 and out.endswith("ok=true\n")


def test_build_roundtrip(capsys, graphs):
    path = graphs["dir"] / "built.json"
    code, _, _ = call(capsys, "build", "mws", "--n", "3", "--strict", "-o", str(path))
    assert code == 0 and load_file(path) == build_mws_qbp(3)
    code, out, _ = call(capsys, "build", "disj", "--n", "2", "--format", "dot")
    assert code == 0 and out.startswith("digraph")
    code, _, _ = call(capsys, "build", "random", "--n", "3", "--width", "2", "--seed", "4", "-o", str(path))
    assert code == 0


def test_validate_and_classify(capsys, graphs):
    code, out, _ = call(capsys, "validate", "--graph", graphs["mws4"])
    assert code == 0 and out.startswith("well_formed=true unidirectional=true")
    code, out, _ = call(capsys, "classify", "--graph", graphs["mws4"])
    assert code == 0 and "regular_read_once=true obdd_order=none" in out


def test_bridge_check(capsys, graphs):
    code, out, _ = call(capsys, "bridge-check", "--graph", graphs["mws4"], "--pair", "2", "--background", "010101")
    assert code == 0 and out.startswith("PASS max_state_deviation=")


def test_experiments(capsys):
    code, out, _ = call(capsys, "experiment", "equidist", "--q", "5", "--n", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["b"] for r in rows] == ["0", "1", "2", "3", "4"]
    assert float(rows[1]["probability"]) == 3 / 16
    code, out, _ = call(capsys, "experiment", "ind-rect", "--n", "4", "--eps", "0.25")
    assert code == 0 and out.splitlines()[0] == "maxA,bound" and out.splitlines()[1].startswith("5,")
    code, out, _ = call(capsys, "experiment", "mws-scaling", "--ns", "4", "8")
    assert code == 0 and "# slope=" in out
    code, out, _ = call(capsys, "experiment", "fact-suite", "--trials", "20")
    assert code == 0 and out.startswith("fact,trials,violations,worst_margin")
    code, out, _ = call(capsys, "experiment", "and-frontier", "--trials", "5")
    assert code == 0 and len(out.splitlines()) == 1 + 1 + 24 + 5


def test_output_is_deterministic(capsys):
    a = call(capsys, "experiment", "fact-suite", "--trials", "10", "--seed", "3")
    b = call(capsys, "experiment", "fact-suite", "--trials", "10", "--seed", "3")
    assert a == b


def test_usage_errors(capsys, graphs):
    assert call(capsys, "bogus")[0] == 2
    assert call(capsys)[0] == 2
    assert call(capsys, "run", "--graph", str(graphs["dir"] / "missing.json"), "--input", "1")[0] == 2
    assert call(capsys, "run", "--graph", graphs["disj2"], "--input", "12")[0] == 2
    assert call(capsys, "ic", "--protocol", "nonsense")[0] == 2
    assert call(capsys, "verify", "--graph", graphs["disj2"], "--function", "nope")[0] == 2
    assert call(capsys, "run", "--graph", graphs["disj2"], "--input", "1110", "--tol", "-1")[0] == 2


def test_truncated_file_is_parse_error(capsys, graphs):
    path = graphs["dir"] / "broken.json"
    data = open(graphs["disj2"], "rb").read()
    path.write_bytes(data[: len(data) // 2])
    code, _, err = call(capsys, "validate", "--graph", str(path))
    assert code == 2 and "error" in err


def test_acceptance_subset_csv(capsys):
    code, out, _ = call(capsys, "acceptance", "--only", "3", "4")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["criterion", "title", "passed", "measured", "tolerance"]
    assert [r[0] for r in rows[1:]] == ["3", "4"] and all(r[2] == "true" for r in rows[1:])
