import json
import os

import pytest

from app.experiments.execute_experiment import CONFIGS_DIR, list_demos, main, parse_levels, resolve_seed
from app.experiments.experiment_builder import build_equation, build_plan
from app.experiments.experiment_config import load_config, parse_config
from app.experiments.experiment_utils import format_value, parse_value, read_report_csv
from app.utils.errors import BudgetExceededError, ConfigurationError
from app.utils.run_budget import check_budget, estimate_run_cost

DIAGONAL_CONFIG = """\
[experiment]
equation = "diagonal"
name = "tiny"
levels = [2, 4, 8]
n_ref = 32
paths = 16
steps = 1
seed = 5

[equation]
q = 1.0

[diffusion]
kind = "diagonal"
"""


def write_config(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_parse_config_defaults():
    loaded = parse_config(DIAGONAL_CONFIG)
    assert loaded.config.name == "tiny"
    assert loaded.config.experiment.functional == "gaussian_bell"
    assert loaded.config.equation.horizon == 1.0
    assert len(loaded.sha256) == 64


def test_unknown_key_reports_its_line():
    text = '[experiment]\nequation = "diagonal"\nlevels = [1, 2]\nn_ref = 8\ncolour = "red"\n'
    with pytest.raises(ConfigurationError) as excinfo:
        parse_config(text)
    assert excinfo.value.line == 5
    assert "line 5" in str(excinfo.value)


def test_levels_must_increase():
    text = '[experiment]\nequation = "diagonal"\nlevels = [2, 1]\nn_ref = 8\n'
    with pytest.raises(ConfigurationError) as excinfo:
        parse_config(text)
    assert excinfo.value.line == 3


def test_levels_close_to_reference_need_opt_in():
    text = '[experiment]\nequation = "diagonal"\nlevels = [1, 4]\nn_ref = 8\n'
    with pytest.raises(ConfigurationError) as excinfo:
        parse_config(text)
    assert excinfo.value.line == 1
    loaded = parse_config(text + "allow_reference_bias = true\n")
    assert loaded.config.experiment.levels == [1, 4]


def test_toml_syntax_error_reports_line():
    text = '[experiment]\nequation = "diagonal"\nlevels [1, 2]\n'
    with pytest.raises(ConfigurationError) as excinfo:
        parse_config(text)
    assert excinfo.value.line == 3


def test_non_finite_values_are_rejected():
    text = DIAGONAL_CONFIG.replace("q = 1.0", "q = 1.0\nhorizon = nan")
    with pytest.raises(ConfigurationError) as excinfo:
        parse_config(text)
    assert excinfo.value.line == 12


def test_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "missing.toml"))


def test_builder_errors_point_at_keys():
    text = '[experiment]\nequation = "wave"\nlevels = [1, 2]\nn_ref = 16\n\n[equation]\nmodes = 8\n\n[diffusion]\nb0 = 1.0\n'
    loaded = parse_config(text)
    with pytest.raises(ConfigurationError) as excinfo:
        build_equation(loaded.config, loaded.text)
    assert excinfo.value.line == 7


def test_diagonal_needs_one_lambda_source():
    loaded = parse_config(DIAGONAL_CONFIG.replace("q = 1.0", "q = 1.0\nlambdas = [1.0, 0.5]"))
    with pytest.raises(ConfigurationError):
        build_equation(loaded.config, loaded.text)


def test_builder_wires_plan_and_norm_overrides():
    loaded = parse_config(DIAGONAL_CONFIG + "\n[norms]\ndrift_c1 = 3.0\n")
    spec = build_equation(loaded.config, loaded.text)
    assert spec.norms.drift_c1 == 3.0
    plan = build_plan(loaded.config, seed=9)
    assert plan.mode_count_ref == 32
    assert plan.steps == 1
    assert plan.seed == 9


def test_seed_precedence():
    environ = {"SPDE_LAB_SEED": "42"}
    assert resolve_seed(1, 2, environ) == 1
    assert resolve_seed(None, 2, environ) == 2
    assert resolve_seed(None, None, environ) == 42
    assert resolve_seed(None, None, {}) == 0
    with pytest.raises(ConfigurationError):
        resolve_seed(None, None, {"SPDE_LAB_SEED": "abc"})


def test_parse_levels():
    assert parse_levels("16, 64,256") == [16, 64, 256]
    assert parse_levels("") == []
    with pytest.raises(ConfigurationError):
        parse_levels("1,x")


def test_value_formatting():
    assert format_value(None) == "Unavailable"
    assert format_value(0.1) == "0.10000000000000001"
    assert parse_value("Unavailable") is None
    assert parse_value("3") == 3
    assert parse_value("0.25") == 0.25
    assert parse_value("wave") == "wave"


def test_budget_check():
    cost = estimate_run_cost("wave", 64, 256, 2048, 3, collocation=True)
    assert cost["mode_steps"] == 64.0 * 256 * 2048 * 4
    assert cost["weight"] == 8.0
    with pytest.raises(BudgetExceededError):
        check_budget(cost, 1e6)


def test_simulate_writes_reproducible_artifacts(tmp_path):
    config = write_config(tmp_path, DIAGONAL_CONFIG)
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["simulate", "--config", config, "--out", str(first)]) == 0
    assert main(["simulate", "--config", config, "--out", str(second), "--workers", "2"]) == 0
    report = (first / "tiny_report.csv").read_bytes()
    assert report == (second / "tiny_report.csv").read_bytes()
    assert (first / "tiny_summary.json").read_bytes() == (second / "tiny_summary.json").read_bytes()

    rows = read_report_csv(str(first / "tiny_report.csv"))
    assert [row["n"] for row in rows] == [2, 4, 8]
    assert rows[0]["strong_sq"] > rows[1]["strong_sq"] > rows[2]["strong_sq"] > 0

    summary = json.loads((first / "tiny_summary.json").read_text(encoding="utf-8"))
    assert summary["provenance"]["config_text"] == DIAGONAL_CONFIG
    assert summary["provenance"]["seed"] == 5

    replay = tmp_path / "replay"
    assert main(["simulate", "--config", str(first / "tiny_summary.json"), "--out", str(replay)]) == 0
    assert (replay / "tiny_report.csv").read_bytes() == report


def test_seed_flag_changes_results(tmp_path):
    config = write_config(tmp_path, DIAGONAL_CONFIG)
    assert main(["simulate", "--config", config, "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", config, "--out", str(tmp_path / "b"), "--seed", "6"]) == 0
    assert (tmp_path / "a" / "tiny_report.csv").read_bytes() != (tmp_path / "b" / "tiny_report.csv").read_bytes()


def test_replayed_summary_keeps_the_seed_of_its_run(tmp_path, monkeypatch):
    monkeypatch.delenv("SPDE_LAB_SEED", raising=False)
    config = write_config(tmp_path, DIAGONAL_CONFIG.replace("seed = 5\n", ""))
    first, replay = tmp_path / "first", tmp_path / "replay"
    assert main(["simulate", "--config", config, "--out", str(first), "--seed", "7"]) == 0

    monkeypatch.setenv("SPDE_LAB_SEED", "3")
    assert main(["simulate", "--config", str(first / "tiny_summary.json"), "--out", str(replay)]) == 0
    assert (replay / "tiny_report.csv").read_bytes() == (first / "tiny_report.csv").read_bytes()
    summary = json.loads((replay / "tiny_summary.json").read_text(encoding="utf-8"))
    assert summary["provenance"]["seed"] == 7


def test_summary_seed_must_be_an_integer(tmp_path):
    summary = {"provenance": {"config_text": DIAGONAL_CONFIG, "seed": "seven"}}
    path = write_config(tmp_path, json.dumps(summary), name="summary.json")
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_rates_command(tmp_path, capsys):
    config = write_config(tmp_path, DIAGONAL_CONFIG)
    assert main(["simulate", "--config", config, "--out", str(tmp_path)]) == 0
    assert main(["rates", "--out", str(tmp_path)]) == 0
    assert "tiny" in capsys.readouterr().out


def test_exit_codes(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.toml")]) == 2
    bad = write_config(tmp_path, DIAGONAL_CONFIG.replace("paths = 16", "paths = 1"), "bad.toml")
    assert main(["simulate", "--config", bad]) == 2
    expensive = write_config(tmp_path, DIAGONAL_CONFIG.replace("seed = 5", "seed = 5\nbudget = 10.0"), "big.toml")
    assert main(["simulate", "--config", expensive, "--out", str(tmp_path)]) == 3
    assert main(["rates", "--out", str(tmp_path / "nowhere")]) == 2


def test_oracle_command(capsys):
    assert main(["oracle", "--q", "1", "--levels", "1,1024"]) == 0
    output = capsys.readouterr().out
    assert "0.7071068" in output
    assert "weak_ratio" in output
    assert main(["oracle", "--q", "1", "--lambdas", "1,0.5"]) == 2
    assert main(["oracle", "--q", "0.5"]) == 2


def test_bounds_command(tmp_path, capsys):
    config = write_config(tmp_path, DIAGONAL_CONFIG)
    assert main(["bounds", "--config", config, "--horizons", "0.5,1"]) == 0
    output = capsys.readouterr().out
    assert "apriori" in output
    assert "tail_ratio_bound" in output


def test_demo_listing(capsys):
    demos = list_demos()
    assert "wave_additive" in demos
    assert "gaussian_diagonal" in demos
    assert main(["demo", "--list"]) == 0
    assert "hjmm_exponential" in capsys.readouterr().out
    assert main(["demo", "no_such_demo"]) == 2


def test_bundled_configs_build():
    for name in list_demos():
        loaded = load_config(os.path.join(CONFIGS_DIR, f"{name}.toml"))
        assert loaded.config.name == name
        spec = build_equation(loaded.config, loaded.text)
        assert spec.name == loaded.config.experiment.equation
