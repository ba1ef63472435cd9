import json
from pathlib import Path

import pytest

from contestlab.cli import run_command
from contestlab.config import ConfigError, load_scenario, scenario_from_dict, scenario_to_dict

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(tmp_path, *argv):
    return run_command(list(argv) + ["--out", str(tmp_path)])


def test_solve(tmp_path, capsys):
    assert run(tmp_path, "solve", "--config", str(CONFIGS / "uniform_n2.json")) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["a_star"] == pytest.approx(0.1, abs=1e-9) and out["corner"] == "interior"
    saved = json.loads((tmp_path / "solve.json").read_text())
    assert saved["seed"] == 0 and saved["scenario"]["costs"]["c_C"] == 0.1


def test_usage_errors(tmp_path):
    cfg = str(CONFIGS / "uniform_n2.json")
    assert run(tmp_path, "calibrate", "--config", cfg, "--target", "1.5") == 2
    assert run(tmp_path, "frobnicate", "--config", cfg) == 2
    assert run(tmp_path, "solve", "--config", cfg, "--bogus") == 2
    assert run(tmp_path, "solve", "--config", str(tmp_path / "missing.json")) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**json.loads(Path(cfg).read_text()), "colour": "red"}))
    assert run(tmp_path, "solve", "--config", str(bad)) == 2


def test_domain_error_writes_json(tmp_path):
    assert run(tmp_path, "asymmetric", "--config", str(CONFIGS / "asymmetric_beta0.json")) == 1
    err = json.loads((tmp_path / "error.json").read_text())
    assert err["error"]["type"] == "ContractError"


def test_learn_is_byte_deterministic(tmp_path):
    cfg = str(CONFIGS / "uniform_n2.json")
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "learn", "--config", cfg, "--seed", "7", "--reps", "10000") == 0
    assert run(b, "learn", "--config", cfg, "--seed", "7", "--reps", "10000") == 0
    assert (a / "learn.json").read_bytes() == (b / "learn.json").read_bytes()


def test_schedule_csv(tmp_path):
    cfg = str(CONFIGS / "uniform_n2.json")
    assert run(tmp_path, "schedule", "--config", cfg, "--target", "0.5", "--n-range", "2:5", "--format", "csv") == 0
    lines = (tmp_path / "schedule.csv").read_text().splitlines()
    assert lines[0] == "n,p_B,p_C,residual" and len(lines) == 5
    assert float(lines[1].split(",")[2]) == pytest.approx(1 / 55)


@pytest.mark.parametrize("argv", [
    ("design", "uniform_n2.json", "--reps", "2000"),
    ("calibrate", "uniform_n2.json", "--target", "0.3"),
    ("learn2", "learning_n2.json", "--p-b2", "2.0", "--reps", "2000"),
    ("asymmetric", "asymmetric_n2.json", "--reps", "20000"),
    ("endogenous-check", "effort_perfect.json", "--target", "0.2", "--reps", "5000"),
    ("endogenous-calibrate", "effort_softmax.json", "--target", "0.2", "--reps", "20000"),
    ("simulate", "uniform_n2.json", "--reps", "100", "--format", "csv"),
    ("verify", "uniform_n2.json", "--reps", "20000"),
])
def test_every_command_runs(tmp_path, argv):
    cmd, cfg, *rest = argv
    assert run(tmp_path, cmd, "--config", str(CONFIGS / cfg), *rest) == 0
    fmt = "csv" if "csv" in rest else "json"
    assert (tmp_path / f"{cmd}.{fmt}").exists()


def test_config_round_trip():
    for path in CONFIGS.glob("*.json"):
        sc = load_scenario(path)
        assert scenario_from_dict(scenario_to_dict(sc)) == sc


def test_config_rejects_unknown_nested_keys():
    spec = json.loads((CONFIGS / "uniform_n2.json").read_text())
    spec["costs"]["c_X"] = 1.0
    with pytest.raises(ConfigError):
        scenario_from_dict(spec)
    spec = json.loads((CONFIGS / "uniform_n2.json").read_text())
    spec["rewards"] = {"p_B": 0.1, "p_C": 0.2}
    with pytest.raises(ConfigError):
        scenario_from_dict(spec)
