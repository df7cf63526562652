#!/usr/bin/env python3
"""
End-to-end checks of the cocycle-lab command line: run directories, exit codes,
validation and reproducibility of report.json.
"""
import json
from pathlib import Path

import pytest

from cocycle_lab.commands.validate import validate
from cocycle_lab.main import build_parser, main, run
from cocycle_lab.settings import apply_overrides, load_config, parse_override
from cocycle_lab.utils.errors import ConfigurationError

CONFIGS = Path(__file__).parent / "configs"
SMALL_ESTIMATE = ["estimate.horizon=500", "estimate.sample_count=200"]


def _read(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_parse_override_reads_json_and_shorthand():
    assert parse_override("suite.horizon=1000") == (["suite", "horizon"], 1000)
    assert parse_override("output_dir=runs/a") == (["output_dir"], "runs/a")
    path, value = parse_override("cocycle=constant:1")
    assert path == ["cocycle"]
    assert value == {"base": {"kind": "constant", "value": [1.0]}, "modifiers": []}
    _, value = parse_override("cocycle=indicator:0.25")
    assert value["base"] == {"kind": "indicator", "beta": 0.25}
    with pytest.raises(ConfigurationError):
        parse_override("no-equals-sign")
    with pytest.raises(ConfigurationError):
        parse_override("cocycle=constant")


def test_overrides_create_missing_blocks():
    tree = apply_overrides({}, ["suite.grid.points=[[0.5]]", "master_seed=9"])
    assert tree == {"suite": {"grid": {"points": [[0.5]]}}, "master_seed": 9}


def test_load_config_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("COCYCLE_LAB_OUT", str(tmp_path / "env"))
    config = load_config(CONFIGS / "estimate_pm1_walk.json", ["master_seed=5"], seed=11)
    assert config.master_seed == 11
    assert config.output_dir == str(tmp_path / "env")
    config = load_config(CONFIGS / "estimate_pm1_walk.json", out=str(tmp_path / "cli"))
    assert config.output_dir == str(tmp_path / "cli")


def test_parser_accepts_repeated_overrides():
    args = build_parser().parse_args(
        ["suite", "weak_law", "--config", "c.json", "--override", "a=1", "--override", "b=2", "--workers", "2"]
    )
    assert args.command == "suite"
    assert args.name == "weak_law"
    assert args.override == ["a=1", "b=2"]
    assert args.workers == 2


def test_estimate_writes_the_run_directory(tmp_path):
    code = run("estimate", config_path=CONFIGS / "estimate_pm1_walk.json", overrides=SMALL_ESTIMATE,
               out=str(tmp_path))
    assert code == 0
    root = tmp_path / "estimate"
    report = _read(root / "report.json")
    manifest = _read(root / "manifest.json")
    assert (root / "run.log").exists()
    assert (root / "curves" / "near_return_fraction.csv").exists()
    assert report["command"] == "estimate"
    assert report["recurrence"]["horizons"][-1] == 500
    assert manifest["exit_code"] == 0
    assert manifest["command"] == "estimate"
    assert len(manifest["config_sha256"]) == 64
    assert "numpy" in manifest["versions"]


def test_constant_drift_is_transient_from_the_command_line(tmp_path, capsys):
    code = main([
        "suite", "integrable_mean",
        "--config", str(CONFIGS / "suite_integrable_mean.json"),
        "--override", "cocycle=constant:1",
        "--override", "suite.horizon=200",
        "--override", "suite.sample_count=100",
        "--out", str(tmp_path),
    ])
    assert code == 0
    result = _read(tmp_path / "suite-integrable_mean" / "report.json")["result"]
    assert result["verdict"] == "transient"
    assert result["status"] == "consistent"
    assert "transient" in capsys.readouterr().out


def test_cited_suite_name_runs_with_the_shipped_config(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("COCYCLE_LAB_CONFIGS", str(CONFIGS))
    code = main([
        "suite", "theorem3",
        "--override", "cocycle=constant:1",
        "--override", "suite.horizon=200",
        "--override", "suite.sample_count=100",
        "--out", str(tmp_path),
    ])
    assert code == 0
    result = _read(tmp_path / "suite-theorem3" / "report.json")["result"]
    assert result["name"] == "integrable_mean"
    assert result["verdict"] == "transient"
    assert "transient" in capsys.readouterr().out


def test_cited_and_canonical_names_give_the_same_report(tmp_path):
    reports = []
    for name in ("theorem3", "integrable_mean"):
        out = tmp_path / name
        assert run("suite", name, config_path=CONFIGS / "suite_integrable_mean.json",
                   overrides=["cocycle=constant:1", "suite.horizon=200", "suite.sample_count=100"],
                   out=str(out)) == 0
        reports.append((out / f"suite-{name}" / "report.json").read_bytes())
    assert reports[0] == reports[1]


def test_report_is_identical_across_reruns_and_worker_counts(tmp_path):
    payloads = []
    for i, workers in enumerate((1, 1, 3)):
        out = tmp_path / str(i)
        assert run("estimate", config_path=CONFIGS / "estimate_pm1_walk.json", overrides=SMALL_ESTIMATE,
                   out=str(out), workers=workers) == 0
        payloads.append((out / "estimate" / "report.json").read_bytes())
    assert payloads[0] == payloads[1] == payloads[2]


def test_seed_changes_the_report(tmp_path):
    reports = []
    for seed in (1, 2):
        out = tmp_path / str(seed)
        run("estimate", config_path=CONFIGS / "estimate_pm1_walk.json", overrides=SMALL_ESTIMATE,
            seed=seed, out=str(out))
        reports.append((out / "estimate" / "report.json").read_bytes())
    assert reports[0] != reports[1]


def test_configuration_errors_exit_with_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1, "master_seed": -1}', encoding="utf-8")
    assert run("estimate", config_path=bad, out=str(tmp_path)) == 2
    assert run("estimate", config_path=tmp_path / "missing.json", out=str(tmp_path)) == 2
    code = run("suite", "no_such_suite", config_path=CONFIGS / "suite_weak_law.json", out=str(tmp_path))
    assert code == 2
    assert _read(tmp_path / "suite-no_such_suite" / "manifest.json")["exit_code"] == 2


def test_missing_suite_name_exits_with_two(tmp_path):
    assert run("suite", config_path=CONFIGS / "suite_weak_law.json", out=str(tmp_path)) == 2


def test_estimate_needs_a_model(tmp_path):
    assert run("estimate", config_path=CONFIGS / "selftest.json", out=str(tmp_path)) == 2


def test_horizon_bound_exits_with_three(tmp_path):
    overrides = SMALL_ESTIMATE + ["horizon_bound=100"]
    code = run("estimate", config_path=CONFIGS / "estimate_pm1_walk.json", overrides=overrides, out=str(tmp_path))
    assert code == 3


def test_validate_reports_markov_errors(tmp_path):
    config = tmp_path / "markov.json"
    config.write_text(json.dumps({
        "schema_version": 1,
        "system": {"kind": "markov_shift", "transition": [[0.5, 0.4], [0.5, 0.5]], "stationary": [0.5, 0.5]},
        "cocycle": {"base": {"kind": "coordinate_read"}},
    }), encoding="utf-8")
    report = validate(config)
    assert not report.ok
    assert any("rows must sum to 1" in message for message in report.errors)
    assert run("validate", config_path=config, out=str(tmp_path)) == 2
    assert _read(tmp_path / "validate" / "report.json")["validation"]["errors"]


@pytest.mark.parametrize("config", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_validate(config):
    report = validate(config)
    assert report.errors == []


def test_validate_warns_on_thin_balls():
    overrides = ["suite.sample_count=100", "suite.eta_grid=[0.5, 0.01]"]
    report = validate(CONFIGS / "suite_density_at_zero.json", overrides)
    assert report.ok
    assert any("eta_grid" in message for message in report.warnings)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
