import csv
import io
import json
import subprocess
import sys

import pytest

from builders import SCENARIOS
from orgsim.cli import main

FIRE = str(SCENARIOS / "fire_rescue.json")
SEP = str(SCENARIOS / "scope_separation.json")


@pytest.fixture(autouse=True)
def serial(monkeypatch):
    monkeypatch.setenv("ORGSIM_NO_PARALLEL", "1")


def test_validate_exit_codes(tmp_path, capsys):
    assert main(["validate", FIRE]) == 0
    bad = json.loads(open(FIRE).read())
    bad["conditions"][0]["origin_node"] = "nowhere"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    assert main(["validate", str(path)]) == 1
    assert "dangling-ref(nowhere)" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.json")]) == 2


def test_usage_error_is_exit_2():
    proc = subprocess.run([sys.executable, "-m", "orgsim", "frobnicate"], capture_output=True)
    assert proc.returncode == 2


def test_run_writes_outputs_and_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", FIRE, "--mode", "fso", "--seed", "7", "--out", str(a)]) == 0
    assert main(["run", FIRE, "--mode", "fso", "--seed", "7", "--out", str(b)]) == 0
    hashes = [line for line in capsys.readouterr().out.splitlines() if line.startswith("trace_hash")]
    assert len(hashes) == 2 and hashes[0] == hashes[1]
    for name in ("trace.jsonl", "report.json", "congestion.csv", "bubbles.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    report = json.loads((a / "report.json").read_text())
    assert report["metrics"]["success_rate"] == 1.0
    assert report["run"]["trace_hash"] == hashes[0].split()[1]
    rows = list(csv.reader(io.StringIO((a / "bubbles.csv").read_text())))
    assert rows[0] == ["tick", "active_bubbles"] and len(rows) == 31


def test_run_strict_fails_and_bad_mode_exits_1(tmp_path, capsys):
    assert main(["run", FIRE, "--mode", "strict", "--out", str(tmp_path), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["metrics"]["success_rate"] == 0.0
    assert main(["run", FIRE, "--mode", "anarchy", "--out", str(tmp_path)]) == 1
    assert main(["run", FIRE, "--horizon", "0", "--out", str(tmp_path)]) == 1


def test_compare_separation_rows(tmp_path, capsys):
    assert main(["compare", SEP, "--format", "json", "--out", str(tmp_path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [(r["mode"], r["success_rate"]) for r in doc["rows"]] == [
        ("strict", 0.0), ("sociocracy", 0.0), ("fso", 1.0)]
    assert (tmp_path / "compare.txt").read_text().startswith("mode")
    assert main(["compare", SEP, "--modes", "strict,fso", "--format", "json"]) == 0
    assert len(json.loads(capsys.readouterr().out)["rows"]) == 2
    assert main(["compare", SEP, "--modes", "strict,bogus"]) == 1


def _sweep(capsys, *args):
    assert main(["sweep", FIRE, *args]) == 0
    return capsys.readouterr().out


def test_sweep_aggregates(capsys):
    text = _sweep(capsys, "--seeds", "3", "--modes", "fso,strict")
    assert text == _sweep(capsys, "--seeds", "3", "--modes", "fso,strict")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert {r["mode"] for r in rows} == {"fso", "strict"}
    for r in rows:
        if r["count"] != "0":
            assert float(r["min"]) <= float(r["mean"]) <= float(r["max"])
    assert main(["sweep", FIRE, "--seeds", "0"]) == 1


def test_sweep_of_one_seed_equals_run(tmp_path, capsys):
    rows = list(csv.DictReader(io.StringIO(_sweep(capsys, "--seeds", "1", "--modes", "sociocracy"))))
    main(["run", FIRE, "--mode", "sociocracy", "--out", str(tmp_path), "--format", "json"])
    metrics = json.loads(capsys.readouterr().out)["metrics"]
    row = next(r for r in rows if r["metric"] == "success_rate")
    assert float(row["mean"]) == metrics["success_rate"] == float(row["min"]) == float(row["max"])


def test_parallel_sweep_matches_serial(monkeypatch):
    from orgsim.cli import sweep
    from orgsim.scenario import load_scenario
    spec = load_scenario(FIRE)
    assert sweep(spec, ["fso", "strict"], 2, parallel=True) == sweep(spec, ["fso", "strict"], 2, parallel=False)


def test_spof_outputs(tmp_path, capsys):
    assert main(["spof", FIRE, "--out", str(tmp_path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["criticality"]["city"]["city-hall"] == 1.0
    assert doc["criticality"]["army"]["engineers"] == 0.0
    assert (tmp_path / "spof.csv").read_text().startswith("org,node,criticality\n")
