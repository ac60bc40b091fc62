import json
import logging
import os

import pandas as pd
import pytest

from src import __version__
from src.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, _parse_values, main, output_directory
from src.utils.config import METADATA_FILENAME, OUTPUT_DIR_ENV_VAR, RESULTS_FILENAME

FAST_ARGS = ["--max-iter", "2", "--samples", "10"]


@pytest.fixture(autouse=True)
def _restore_logging():
    """main() reconfigures the root logger; put pytest's handlers back afterwards."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def _run_args(config_path, *extra):
    return ["-q", "run", "--config", str(config_path), "--sweep", "rate", "--values", "1",
            "--methods", "proposed,all_active", "--trials", "1", *FAST_ARGS, *extra]


def test_check_config_valid(scenario_file, capsys):
    assert main(["check-config", "--config", str(scenario_file)]) == EXIT_OK
    out = capsys.readouterr().out
    assert f"{scenario_file}: valid" in out
    assert "eta not given, using default" in out


def test_check_config_lists_every_issue(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"eta": 1.5, "colour": "blue"}), encoding="utf-8")
    assert main(["check-config", "--config", str(path)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "eta:" in err
    assert "colour: unknown key" in err


def test_check_config_missing_file(tmp_path, capsys):
    assert main(["check-config", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
    assert "cannot read" in capsys.readouterr().err


def test_run_writes_results(scenario_file, tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main(_run_args(scenario_file, "--out", str(out_dir))) == EXIT_OK
    frame = pd.read_csv(out_dir / RESULTS_FILENAME)
    assert list(frame["method"]) == ["proposed", "all_active"]
    metadata = json.loads((out_dir / METADATA_FILENAME).read_text(encoding="utf-8"))
    assert metadata["experiment"]["sweep_variable"] == "rate"
    assert "Wrote" in capsys.readouterr().out


def test_run_uses_output_directory_from_environment(scenario_file, tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, str(target))
    monkeypatch.chdir(tmp_path)
    assert main(_run_args(scenario_file)) == EXIT_OK
    assert (target / RESULTS_FILENAME).exists()
    assert not (tmp_path / "results").exists()


def test_output_directory_precedence(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV_VAR, raising=False)
    assert output_directory(None) == "results"
    monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, "elsewhere")
    assert output_directory(None) == "elsewhere"
    assert output_directory("flag") == "flag"


def test_run_reports_all_infeasible(tmp_path, tiny_scenario):
    path = tmp_path / "starved.json"
    path.write_text(json.dumps({**tiny_scenario, "P_max": 1e-6}), encoding="utf-8")
    assert main(_run_args(path, "--out", str(tmp_path / "out"))) == EXIT_INFEASIBLE


@pytest.mark.parametrize("extra", [
    ["--values", "3,2"],
    ["--methods", "random"],
    ["--trials", "0"],
])
def test_run_rejects_bad_arguments(scenario_file, tmp_path, extra, capsys):
    args = _run_args(scenario_file, "--out", str(tmp_path / "out"))
    flag = extra[0]
    args[args.index(flag) + 1] = extra[1]
    assert main(args) == EXIT_CONFIG
    assert "invalid arguments" in capsys.readouterr().err
    assert not os.path.exists(tmp_path / "out")


def test_demo_prints_power_breakdown(scenario_file, capsys):
    assert main(["-q", "demo", "--config", str(scenario_file), *FAST_ARGS]) == EXIT_OK
    out = capsys.readouterr().out
    assert "network power:" in out
    assert "exhaustive" in out


def test_parse_values_keeps_integers_for_counts():
    assert _parse_values("2, 3,4", "K") == [2, 3, 4]
    assert _parse_values("1.5,2", "rate") == [1.5, 2.0]


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert __version__ in capsys.readouterr().out
