import json
import math
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from tlnet import cli
from tlnet.netdesc import load_schema

NETWORKS = Path(__file__).resolve().parent.parent / "networks"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    report = json.loads(out) if out else None
    if report is not None:
        jsonschema.validate(report, load_schema("report.schema.json"))
    return code, report, err


def test_reduce_gs_example(capsys):
    code, rep, _ = run_json(capsys, "reduce", str(NETWORKS / "gs_plain.json"))
    assert code == 0 and rep["all_passed"]
    re, im = rep["outputs"]["s_fb"]["value"][0][0]
    assert re == pytest.approx(1.0, abs=1e-14) and im == pytest.approx(0.0, abs=1e-14)


def test_text_report(capsys):
    code, out, _ = run(capsys, "reduce", str(NETWORKS / "gs_plain.json"))
    assert code == 0 and "[PASS] s_fb_unitary" in out


def test_paths_report(capsys):
    code, rep, _ = run_json(capsys, "paths", str(NETWORKS / "gs_phases.json"), "--max-loops", "40")
    assert code == 0 and rep["all_passed"]
    curve = rep["outputs"]["truncation_curve"]["value"]
    assert len(curve) == 41
    q = rep["outputs"]["loop_gain_norm"]["value"]
    # error decays like q^N
    assert curve[40][1] <= curve[0][1] * q**40 * 10 + 1e-15
    assert not rep["outputs"]["warning_loop_gain_ge_1"]["value"]


def test_paths_unit_gain_warns(capsys):
    code, rep, _ = run_json(capsys, "paths", str(NETWORKS / "unit_gain.json"))
    assert code == 0
    assert rep["outputs"]["warning_loop_gain_ge_1"]["value"] is True and rep["warnings"]


def test_ill_posed_exit_2(capsys):
    code, out, err = run(capsys, "reduce", str(NETWORKS / "absorber.json"))
    assert code == 2 and out == "" and "IllPosedError" in err


def test_balanced_mismatch_exit_1(capsys):
    code, _, err = run(capsys, "scenario", str(NETWORKS / "balanced_mismatch.json"))
    assert code == 1 and "BlockDiagonalError" in err


def test_paradox_exit_2(capsys):
    code, _, err = run(capsys, "scenario", str(NETWORKS / "lloyd_orthogonal.json"))
    assert code == 2 and "ParadoxError" in err


def test_missing_file_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "reduce", str(tmp_path / "nope.json"))
    assert code == 1 and err


def test_malformed_file_exit_1(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    code, _, err = run(capsys, "reduce", str(f))
    assert code == 1 and "NetworkSyntaxError" in err


def test_validation_error_exit_1(capsys, tmp_path):
    doc = json.loads((NETWORKS / "gs_plain.json").read_text())
    doc["propagators"]["g1"] = [0.5, 0.0]
    f = tmp_path / "lossy.json"
    f.write_text(json.dumps(doc))
    code, _, err = run(capsys, "reduce", str(f))
    assert code == 1 and "/propagators/g1" in err


def test_internal_error_exit_3(capsys, monkeypatch):
    def boom(*a, **k):
        raise KeyError("bug")

    monkeypatch.setitem(cli.COMMANDS, "reduce", boom)
    code, _, err = run(capsys, "reduce", str(NETWORKS / "gs_plain.json"))
    assert code == 3 and "internal error" in err


def test_seed_fallback(capsys, monkeypatch):
    monkeypatch.setenv("TLNET_SEED", "77")
    _, rep, _ = run_json(capsys, "check", str(NETWORKS / "gs_phases.json"), "--trials", "20")
    assert rep["outputs"]["seed"]["value"] == 77
    _, rep, _ = run_json(capsys, "check", str(NETWORKS / "gs_phases.json"), "--trials", "20", "--seed", "5")
    assert rep["outputs"]["seed"]["value"] == 5


def test_check_is_deterministic(capsys):
    a = run_json(capsys, "check", str(NETWORKS / "operator_d2.json"), "--seed", "3", "--trials", "30")[1]
    b = run_json(capsys, "check", str(NETWORKS / "operator_d2.json"), "--seed", "3", "--trials", "30")[1]
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


def test_dumps17_precision():
    text = cli.dumps17({"x": 0.1, "y": [1e-300, float("inf")], "z": True})
    doc = json.loads(text)
    assert text.count("0.10000000000000001") == 1
    assert doc["y"][1] is None and doc["z"] is True
    assert float("0.10000000000000001") == 0.1


def test_non_finite_check_fails():
    rep = cli.Report("reduce", "plain", "f")
    assert not rep.check("x", math.nan, 1.0)
    assert not rep.all_passed


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tlnet", "scenario", str(NETWORKS / "lloyd_identity.json"), "--json"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["all_passed"]
