import csv
import json
import os
import subprocess
import sys

import pytest

from cease.cli import EXIT_ENV, EXIT_OK, EXIT_USAGE, RunConfig, UsageError, compare_csv, main, resolve_scenario
from cease.sim import PART_NAMES
from cease.sim.scenario import bundled_path

from test_sim import tiny


@pytest.fixture
def scen(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(tiny(duration=0.5)))
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_artifacts(scen, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scen), "--policy", "fixed", "--out", str(out)]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["axes.csv", "coverage.csv", "cpe_trace.csv", "manifest.json"]
    cov = read_csv(out / "coverage.csv")
    assert cov[0] == ["part", "ratio"] and [r[0] for r in cov[1:]] == list(PART_NAMES) + ["Avg"]
    axes = read_csv(out / "axes.csv")
    assert axes[0] == ["t", "camera", "az", "el"] and len(axes) == 1 + 10
    cpe = read_csv(out / "cpe_trace.csv")
    assert cpe[0][:2] == ["t", "p_c"] and len(cpe) == 11
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "run" and man["config"]["policy"] == "fixed" and man["seed"] == 5
    assert man["scenario"]["cameras"][0]["fov_deg"] == 72.0
    assert len(man["scenario_sha256"]) == 64


def test_run_trace_level_two_writes_planner_trace(scen, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scen), "--policy", "cease", "--out", str(out), "-tt"]) == EXIT_OK
    lines = (out / "planner_trace.jsonl").read_text().splitlines()
    assert len(lines) == 10
    rec = json.loads(lines[0])
    assert {"t", "candidates", "scores", "chosen", "states"} <= set(rec)
    depth = read_csv(out / "sr_depth.csv")
    assert depth[0] == ["t", "camera", "az_index", "el_index", "depth_m"]
    assert len(depth) == 1 + 10 * 32 and depth[1][:2] == ["0.000", "0"]


def test_seed_override_recorded(scen, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scen), "--policy", "tcp", "--out", str(out), "--seed", "77"]) == EXIT_OK
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 77 and man["scenario"]["seed"] == 77


def test_missing_scenario_exit_2_names_path(tmp_path, capsys):
    missing = tmp_path / "missing.json"
    rc = main(["run", "--scenario", str(missing), "--policy", "fixed", "--out", str(tmp_path / "o")])
    assert rc == EXIT_USAGE
    assert "missing.json" in capsys.readouterr().err


def test_malformed_scenario_exit_2_with_diagnostic(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1,\n "dt": }')
    assert main(["validate", "--scenario", str(bad)]) == EXIT_USAGE
    assert "line 2" in capsys.readouterr().err
    doc = tiny()
    doc["dt"] = "fast"
    bad.write_text(json.dumps(doc))
    assert main(["validate", "--scenario", str(bad)]) == EXIT_USAGE
    assert "field dt" in capsys.readouterr().err


def test_unknown_policy_and_bad_arguments_exit_2(scen, tmp_path):
    assert main(["run", "--scenario", str(scen), "--policy", "greedy", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["run", "--scenario", str(scen)]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    assert main(["compare", "--scenario", str(scen), "--policies", "tcp", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["compare", "--scenario", str(scen), "--policies", "tcp,tcp", "--out", str(tmp_path)]) == EXIT_USAGE


def test_unwritable_output_exit_3(scen, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    rc = main(["run", "--scenario", str(scen), "--policy", "fixed", "--out", str(blocker / "sub")])
    assert rc == EXIT_ENV


@pytest.mark.skipif(os.geteuid() == 0, reason="permission bits do not bind root")
def test_read_only_output_exit_3(scen, tmp_path):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    try:
        assert main(["run", "--scenario", str(scen), "--policy", "fixed", "--out", str(ro)]) == EXIT_ENV
    finally:
        ro.chmod(0o700)


def test_compare_writes_table_and_is_deterministic(scen, tmp_path, capsys):
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["compare", "--scenario", str(scen), "--out", str(o)]) == EXIT_OK
    table = capsys.readouterr().out
    assert "policy" in table and "cease" in table
    rows = read_csv(outs[0] / "compare.csv")
    assert rows[0] == ["policy", "Body", "RA", "RH", "LA", "LH", "Avg"]
    assert [r[0] for r in rows[1:]] == ["fixed", "tcp", "cease"]
    for name in ("compare.csv", "fixed/coverage.csv", "tcp/axes.csv", "cease/cpe_trace.csv", "cease/axes.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    # the table agrees with each policy's own coverage file
    for r in rows[1:]:
        cov = dict(read_csv(outs[0] / r[0] / "coverage.csv")[1:])
        assert r[1:] == [cov[c] for c in rows[0][1:]]


def test_validate_and_show(scen, capsys):
    assert main(["validate", "--scenario", str(scen)]) == EXIT_OK
    assert "ok" in capsys.readouterr().out
    assert main(["validate", "--scenario", str(scen), "--show"]) == EXIT_OK
    shown = json.loads(capsys.readouterr().out)
    assert shown["planner"]["gamma"] == 0.9


def test_bundled_names_resolve(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert resolve_scenario("exp1") == bundled_path("exp1")
    (tmp_path / "exp1").write_text("{}")
    assert resolve_scenario("exp1").resolve() == (tmp_path / "exp1").resolve()
    assert main(["validate", "--scenario", "exp2"]) == EXIT_OK


def test_run_config_validates():
    with pytest.raises(UsageError):
        RunConfig("s.json", "nope", "out")
    with pytest.raises(UsageError):
        RunConfig("", "fixed", "out")


def test_compare_csv_format():
    cov = {n: 0.5 for n in PART_NAMES} | {"Avg": 0.5}
    text = compare_csv({"fixed": cov, "tcp": dict(cov, Avg=0.12345)})
    assert text.splitlines() == ["policy,Body,RA,RH,LA,LH,Avg", "fixed,0.500,0.500,0.500,0.500,0.500,0.500",
                                 "tcp,0.500,0.500,0.500,0.500,0.500,0.123"]


def test_module_entry_point(scen, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cease", "validate", "--scenario", str(scen)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "ok" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "cease", "run", "--scenario", str(tmp_path / "x.json"),
                           "--policy", "fixed", "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 2 and "x.json" in proc.stderr
