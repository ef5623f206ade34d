import json

import pytest

from cli import EXIT_CONFIG, EXIT_OK, EXIT_TIMEOUT, run_cli

IDLE = {
    "schema": 1,
    "name": "idle",
    "initial": {"robot1": [0.0, -2.0, 0.0], "robot2": [0.0, 2.0, 0.0]},
    "script": [],
}

def _config(tmp_path, document):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)

def test_run_writes_results(tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli(["run", "--config", _config(tmp_path, IDLE), "--out", str(out)])
    assert code == EXIT_OK
    for name in ("trajectory.csv", "residuals.csv", "plot.svg", "metrics.json"):
        assert (out / name).exists()
    assert capsys.readouterr().out.startswith("idle: completed")

def test_run_timeout_exit_code(tmp_path):
    document = {**IDLE, "name": "short", "timeout": 0.5, "horizon": {"steps": 5},
                "script": [{"event": "couple", "pose": [4.0, 0.0, 0.0]}]}
    code = run_cli(["run", "--config", _config(tmp_path, document), "--out", str(tmp_path / "out")])
    assert code == EXIT_TIMEOUT

def test_missing_config(tmp_path):
    assert run_cli(["run", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG

def test_invalid_config(tmp_path):
    document = {**IDLE, "coupling": {"r_ca": -1.0}}
    assert run_cli(["run", "--config", _config(tmp_path, document)]) == EXIT_CONFIG

def test_unknown_preset_is_rejected_by_parser():
    with pytest.raises(SystemExit):
        run_cli(["run", "--preset", "exp9"])

def test_run_needs_a_source():
    with pytest.raises(SystemExit):
        run_cli(["run"])

def test_check_gradients(capsys):
    assert run_cli(["check-gradients", "--trials", "2"]) == EXIT_OK
    assert "max relative derivative error over 2 instances" in capsys.readouterr().out

def test_check_gradients_needs_trials():
    assert run_cli(["check-gradients", "--trials", "0"]) == EXIT_CONFIG

def test_no_subcommand():
    assert run_cli([]) == EXIT_CONFIG
