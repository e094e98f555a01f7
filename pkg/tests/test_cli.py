import json
import subprocess
import sys

import pytest

from rtosmc import __version__
from rtosmc.cli import EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_PASS, EXIT_USAGE, main


def test_passing_cell(capsys):
    assert main(["--app", "pollq", "--policy", "coop"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "PollQ" in out and "s:ok l:ok" in out


def test_failing_cell_writes_trace(tmp_path):
    rc = main(["--app", "BlockQ", "--policy", "timeslice", "--check", "safety",
               "--trace-out", str(tmp_path)])
    assert rc == EXIT_FAIL
    assert (tmp_path / "BlockQ-timeslice-safety.jsonl").exists()


def test_limit_hit_is_inconclusive():
    assert main(["--app", "Semtest", "--policy", "timeslice", "--check", "liveness",
                 "--max-states", "100"]) == EXIT_INCONCLUSIVE


@pytest.mark.parametrize("argv", [
    ["--app", "Nope"],
    ["--policy", "roundrobin"],
    ["--check", "fairness"],
    ["--max-states", "0"],
    ["--idle-yields", "maybe"],
    ["--config", "/nonexistent.json"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"idle_yields": False, "fix_delays": True,
                               "apps": {"countsem": {"fix_delay": 3}}}))
    rep = tmp_path / "r.json"
    rc = main(["--app", "Countsem", "--policy", "timeslice", "--check", "liveness",
               "--config", str(cfg), "--report-out", str(rep)])
    assert rc == EXIT_PASS
    saved = json.loads(rep.read_text())
    assert saved["config"]["idle_yields"] is False
    assert saved["config"]["overrides"] == {"countsem.fix_delay": 3}


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert main(["--config", str(cfg)]) == EXIT_USAGE
    cfg.write_text("[1, 2]")
    assert main(["--config", str(cfg)]) == EXIT_USAGE
    cfg.write_text(json.dumps({"stack_capacity": 0}))
    assert main(["--config", str(cfg)]) == EXIT_USAGE


def test_flags_fix_dynamic(capsys):
    assert main(["--app", "Dynamic", "--policy", "preemptive", "--check", "liveness"]) == EXIT_FAIL
    assert main(["--app", "Dynamic", "--policy", "preemptive", "--check", "liveness",
                 "--with-check-task"]) == EXIT_PASS


def test_expect_mode(tmp_path, capsys):
    exp = tmp_path / "exp.json"
    exp.write_text(json.dumps({"cells": {"BlockQ": {"timeslice": {
        "safety": {"verdict": "SafetyFail", "violation": "S1"}}}}}))
    argv = ["--app", "BlockQ", "--policy", "timeslice", "--check", "safety", "--expect", str(exp)]
    assert main(argv) == EXIT_PASS
    exp.write_text(json.dumps({"BlockQ": {"timeslice": {"safety": {"verdict": "SafetyPass"}}}}))
    assert main(argv) == EXIT_FAIL
    assert "drift" in capsys.readouterr().err


def test_version_and_help(capsys):
    assert main(["--version"]) == EXIT_PASS
    assert __version__ in capsys.readouterr().out
    assert main(["--help"]) == EXIT_PASS


def test_module_entry_point_exit_code():
    proc = subprocess.run([sys.executable, "-m", "rtosmc.cli", "--app", "Nope"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
    assert "unknown app" in proc.stderr
