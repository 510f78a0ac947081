import json
import os

import pytest

from armsynth.cli import main

from helpers import CASE_STUDY_WS

CORRIDOR_WS = """
bbox 0 0 6 6
start 2.25 0.75
region target
 -1 0 -2
 1 0 2.5
 0 -1 -2
 0 1 2.5
end
"""

FAST_FLAGS = ["--grid", "0.5", "--gp-budget", "30", "--max-links", "3",
              "--kmax", "40", "--seed", "11"]


@pytest.fixture()
def corridor_file(tmp_path):
    path = tmp_path / "corridor.workspace"
    path.write_text(CORRIDOR_WS, encoding="utf-8")
    return str(path)


def run_synth(workspace, outdir, extra=()):
    return main(["synth", "--workspace", workspace, "--out", str(outdir),
                 *FAST_FLAGS, *extra])


def test_synth_writes_artifacts_and_exits_zero(tmp_path, corridor_file, capsys):
    out = tmp_path / "run"
    assert run_synth(corridor_file, out) == 0
    for name in ("report.txt", "design.json", "trajectory.csv", "history.csv",
                 "workspace.svg", "log.jsonl"):
        assert (out / name).exists(), name
    doc = json.loads((out / "design.json").read_text())
    assert doc["format"] == "armsynth-design/1"
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("t,q1")
    hist_header = (out / "history.csv").read_text().splitlines()[0]
    assert hist_header.startswith("structure_links,attempt,t,theta1")
    assert hist_header.endswith("rho,acquisition")
    svg = (out / "workspace.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg
    summary = capsys.readouterr().out
    assert "success" in summary


def test_synth_deterministic_outputs(tmp_path, corridor_file):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run_synth(corridor_file, out_a) == 0
    assert run_synth(corridor_file, out_b) == 0
    for name in os.listdir(out_a):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name


def test_missing_workspace_exits_one(tmp_path, capsys):
    code = main(["synth", "--workspace", str(tmp_path / "nope.ws"),
                 "--out", str(tmp_path)])
    assert code == 1
    assert "cannot read" in capsys.readouterr().err


def test_malformed_workspace_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.ws"
    bad.write_text("region nonsense\n", encoding="utf-8")
    code = main(["synth", "--workspace", str(bad), "--out", str(tmp_path)])
    assert code == 1


def test_unsynthesizable_exits_two(tmp_path, capsys):
    ws = tmp_path / "far.ws"
    ws.write_text("""
bbox 0 0 30 30
start 1.5 1.5
region target
 -1 0 -27
 1 0 29
 0 -1 -27
 0 1 29
end
""", encoding="utf-8")
    code = main(["synth", "--workspace", str(ws), "--out", str(tmp_path / "o"),
                 "--grid", "1.0", "--gp-budget", "6", "--max-links", "2",
                 "--kmax", "80", "--paths-per-structure", "2",
                 "--grid-per-dim", "6"])
    assert code == 2
    assert "unsynthesizable" in capsys.readouterr().err


def test_check_round_trip_and_tamper(tmp_path, corridor_file, capsys):
    out = tmp_path / "run"
    assert run_synth(corridor_file, out) == 0
    design = str(out / "design.json")
    assert main(["check", design, "--workspace", corridor_file]) == 0
    assert "verified" in capsys.readouterr().out

    doc = json.loads((out / "design.json").read_text())
    doc["path"][-1] = 0
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(doc), encoding="utf-8")
    assert main(["check", str(tampered), "--workspace", corridor_file]) == 2
    assert "rejected" in capsys.readouterr().err


def test_check_not_a_design_exits_one(tmp_path, corridor_file, capsys):
    bogus = tmp_path / "bogus.json"
    bogus.write_text("{}", encoding="utf-8")
    assert main(["check", str(bogus), "--workspace", corridor_file]) == 1


def test_check_reflects_new_budget(tmp_path, corridor_file):
    # re-checking under a different budget re-solves the certificate; the
    # corridor design needs no perturbation torque, so any budget verifies
    out = tmp_path / "run"
    assert run_synth(corridor_file, out) == 0
    design = str(out / "design.json")
    assert main(["check", design, "--workspace", corridor_file,
                 "--ubound", "0.001"]) == 0


def test_case_study_flags_round_trip(tmp_path):
    ws = tmp_path / "case.ws"
    ws.write_text(CASE_STUDY_WS, encoding="utf-8")
    out = tmp_path / "case"
    code = main(["synth", "--workspace", str(ws), "--out", str(out),
                 "--ubound", "10", "--grid", "0.1", "--seed", "3",
                 "--max-links", "3", "--gp-budget", "40", "--kmax", "150"])
    assert code == 0
    report = (out / "report.txt").read_text()
    assert "status: success" in report
    assert main(["check", str(out / "design.json"),
                 "--workspace", str(ws)]) == 0
