"""CLI subcommands run in-process; exit codes and printed output checked."""

import json
import subprocess
import sys

import pytest

from tiba_sim.cli import main
from tiba_sim.pipeline import read_run_log_file

SCENARIO = """\
# short corridor for quick runs
length_m = 8
seed = 11
nav.mode = waypoint
duration_s = 30
"""


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "short.cfg"
    path.write_text(SCENARIO)
    return str(path)


def test_size_table(capsys):
    assert main(["size"]) == 0
    out = capsys.readouterr().out
    assert "318.50 N" in out  # per-wheel normal load
    assert "191.10 N" in out  # traction limit per wheel
    assert "38.220 N*m" in out  # wheel torque demand
    assert "76.440 N*m" in out  # per-side gearbox demand
    assert "78.500 N*m" in out  # available after the gearbox
    assert "1.2566 m/s" in out
    assert "4.52 km/h" in out
    assert "feasible" in out and "yes" in out


def test_size_json_and_infeasible(capsys):
    assert main(["size", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["feasible"] is True
    assert report["top_speed_m_s"] == pytest.approx(1.2566, abs=1e-4)
    assert main(["size", "--json", "--mass", "220"]) == 0
    heavy = json.loads(capsys.readouterr().out)
    assert heavy["feasible"] is False
    assert heavy["torque_margin_nm"] < 0.0


def test_size_kgf_cm_override(capsys):
    assert main(["size", "--json", "--motor-torque-kgf-cm", "16"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["available_gearbox_torque_nm"] == pytest.approx(
        16 * 0.0980665 * 50.0, rel=1e-9
    )


def test_run_completes_and_logs(scenario_file, tmp_path, capsys):
    log = str(tmp_path / "run.ndjson")
    assert main(["run", "--scenario", scenario_file, "--log", log]) == 0
    out = capsys.readouterr().out
    assert "completion = True" in out
    assert "stem_collisions = 0" in out
    assert "final pose:" in out
    header, records = read_run_log_file(log)
    assert header["seed"] == 11
    assert any(r.kind == "pose" for r in records)


def test_run_seed_override_changes_hash(scenario_file, tmp_path, capsys):
    log_a = str(tmp_path / "a.ndjson")
    log_b = str(tmp_path / "b.ndjson")
    assert main(["run", "--scenario", scenario_file, "--log", log_a]) == 0
    assert (
        main(["run", "--scenario", scenario_file, "--seed", "12", "--log", log_b]) == 0
    )
    capsys.readouterr()
    header_a, _ = read_run_log_file(log_a)
    header_b, _ = read_run_log_file(log_b)
    assert header_b["seed"] == 12
    assert header_a["config_hash"] != header_b["config_hash"]


def test_run_duration_cut_is_failure(scenario_file, capsys):
    # 2 s is nowhere near enough to finish 8 m: exit 1, no crash
    code = main(
        ["run", "--scenario", scenario_file, "--no-log", "--duration", "2"]
    )
    assert code == 1
    assert "completion = False" in capsys.readouterr().out


def test_replay_matches_run(scenario_file, tmp_path, capsys):
    log = str(tmp_path / "run.ndjson")
    save = str(tmp_path / "replayed.ndjson")
    assert main(["run", "--scenario", scenario_file, "--log", log]) == 0
    run_out = capsys.readouterr().out
    assert main(["replay", "--log", log, "--save", save]) == 0
    replay_out = capsys.readouterr().out
    assert replay_out == run_out  # identical metrics and final pose text
    with open(log) as fa, open(save) as fb:
        assert fa.read() == fb.read()  # byte-identical relog


def test_metrics_json(scenario_file, tmp_path, capsys):
    log = str(tmp_path / "run.ndjson")
    main(["run", "--scenario", scenario_file, "--log", log])
    capsys.readouterr()
    assert main(["metrics", "--log", log, "--json"]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["completion"] is True
    assert metrics["stem_collisions"] == 0
    assert metrics["distance_traveled_m"] > 7.0


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("length_m = 8\nwarp_speed = 9\n")
    assert main(["run", "--scenario", str(bad), "--no-log"]) == 2
    assert "unknown key" in capsys.readouterr().err
    assert main(["run", "--scenario", str(tmp_path / "absent.cfg"), "--no-log"]) == 2
    empty = tmp_path / "empty.ndjson"
    empty.write_text("")
    assert main(["metrics", "--log", str(empty)]) == 2


def test_corrupt_log_exit_1(tmp_path, capsys):
    garbled = tmp_path / "garbled.ndjson"
    garbled.write_text('{"format":"tiba-runlog/1"}\nnot json at all\n')
    assert main(["replay", "--log", str(garbled)]) == 1
    assert "corrupt log" in capsys.readouterr().err


def test_console_script_entry_point():
    out = subprocess.run(
        ["tiba-sim", "size", "--json"], capture_output=True, text=True
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["feasible"] is True
