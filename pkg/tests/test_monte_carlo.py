import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.errors import StructuralError
from src.model import monte_carlo
from src.model.monte_carlo import (
    ExperimentSpec,
    all_trials_infeasible,
    build_metadata,
    calculate_monte_carlo_summary,
    draw_realization,
    run_experiment,
    run_trial,
    trial_seed,
    write_results,
)
from src.model.orchestrate import AlgorithmOptions
from src.utils.config import RESULT_COLUMNS
from src.utils.conversion_utils import mw_to_dbm
from src.utils.scenario_loader import load_config_dict, validate_config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

FAST = AlgorithmOptions(max_iter=3, samples=20)
STATUSES = {"solved", "infeasible", "numerical_limit", "constraint_violation"}


@pytest.fixture
def tiny_config(tiny_scenario):
    return load_config_dict(tiny_scenario)[0]


@pytest.fixture
def tiny_spec(tiny_config):
    return ExperimentSpec(
        base=tiny_config, sweep_variable="rate", sweep_values=(1.0,),
        methods=("proposed", "all_active", "exhaustive"), trials=2, master_seed=5, options=FAST,
    )


def test_trial_seeds_are_stable_and_distinct():
    assert trial_seed(42, 0) == trial_seed(42, 0)
    seeds = {trial_seed(42, t) for t in range(50)}
    assert len(seeds) == 50
    assert trial_seed(42, 0) != trial_seed(43, 0)


def test_run_trial_gives_one_row_per_method(tiny_spec):
    rows = run_trial(tiny_spec, 1.0, 0)
    assert [row["method"] for row in rows] == ["proposed", "all_active", "exhaustive"]
    for row in rows:
        assert set(RESULT_COLUMNS) <= set(row)
        assert row["status"] in STATUSES
        assert row["trial_seed"] == trial_seed(5, 0)
        assert row["wall_time_ms"] >= 0.0
    solved = {row["method"]: row for row in rows if row["status"] == "solved"}
    if {"exhaustive", "all_active"} <= set(solved):
        assert solved["exhaustive"]["network_power_mW"] <= solved["all_active"]["network_power_mW"] * (1 + 1e-9)


def test_experiment_is_reproducible(tiny_spec):
    first = run_experiment(tiny_spec, parallel=False)["results_df"].drop(columns="wall_time_ms")
    second = run_experiment(tiny_spec, parallel=False)["results_df"].drop(columns="wall_time_ms")
    pd.testing.assert_frame_equal(first, second)
    assert list(first["method"]) == ["proposed"] * 2 + ["all_active"] * 2 + ["exhaustive"] * 2


def test_solver_arithmetic_failure_is_recorded_as_numerical_limit(tiny_spec, monkeypatch):
    def divide_by_zero(*args, **kwargs):
        raise ZeroDivisionError("float division by zero")

    monkeypatch.setattr(monte_carlo, "run_method", divide_by_zero)
    rows = run_trial(tiny_spec, 1.0, 0)
    assert [row["status"] for row in rows] == ["numerical_limit"] * 3
    assert all(np.isnan(row["network_power_mW"]) for row in rows)


def test_methods_share_the_channel_realization(tiny_config):
    seed = trial_seed(5, 1)
    _, channels_a, algo_a = draw_realization(tiny_config, seed)
    _, channels_b, algo_b = draw_realization(tiny_config, seed)
    np.testing.assert_array_equal(channels_a.g, channels_b.g)
    assert algo_a == algo_b


def test_fixed_users_keep_their_positions(tiny_config):
    placement = np.random.SeedSequence([7]).spawn(1)[0]
    config_a, channels_a, _ = draw_realization(tiny_config, trial_seed(7, 0), placement)
    config_b, channels_b, _ = draw_realization(tiny_config, trial_seed(7, 1), placement)
    assert config_a.geometry.user_pos == config_b.geometry.user_pos
    assert not np.allclose(channels_a.g, channels_b.g)

    free_a, _, _ = draw_realization(tiny_config, trial_seed(7, 0))
    free_b, _, _ = draw_realization(tiny_config, trial_seed(7, 1))
    assert free_a.geometry.user_pos != free_b.geometry.user_pos


def test_config_at_applies_the_swept_variable(tiny_config):
    spec = ExperimentSpec(base=tiny_config, sweep_variable="K", sweep_values=(1, 4))
    assert spec.config_at(4).K == 4
    spec = ExperimentSpec(base=tiny_config, sweep_variable="M", sweep_values=(2, 8))
    assert spec.config_at(8).M == 8
    spec = ExperimentSpec(base=tiny_config, sweep_variable="rate", sweep_values=(2.0,))
    assert spec.config_at(2.0).gamma == (3.0, 3.0)


@pytest.mark.parametrize("kwargs", [
    {"sweep_variable": "N", "sweep_values": (1,)},
    {"sweep_variable": "K", "sweep_values": ()},
    {"sweep_variable": "K", "sweep_values": (4, 2)},
    {"sweep_variable": "K", "sweep_values": (1.5,)},
    {"sweep_variable": "M", "sweep_values": (0, 2)},
    {"sweep_variable": "rate", "sweep_values": (0.0, 1.0)},
    {"sweep_variable": "rate", "sweep_values": (1.0,), "trials": 0},
    {"sweep_variable": "rate", "sweep_values": (1.0,), "trials": 1001},
    {"sweep_variable": "rate", "sweep_values": (1.0,), "methods": ("random",)},
    {"sweep_variable": "rate", "sweep_values": (1.0,), "methods": ()},
    {"sweep_variable": "rate", "sweep_values": (1.0,), "master_seed": -1},
])
def test_experiment_validation(kwargs, tiny_config):
    with pytest.raises(StructuralError):
        ExperimentSpec(base=tiny_config, **kwargs)


def test_exhaustive_search_is_dropped_for_many_ris(make_config, monkeypatch, caplog):
    config = make_config(L=9, N=1)
    spec = ExperimentSpec(base=config, sweep_variable="rate", sweep_values=(1.0,))
    assert spec.exhaustive_disabled
    assert spec.effective_methods() == ("proposed", "all_active")

    forced = ExperimentSpec(base=config, sweep_variable="rate", sweep_values=(1.0,), force_exhaustive=True)
    assert forced.effective_methods() == ("proposed", "all_active", "exhaustive")

    monkeypatch.setattr(monte_carlo, "run_sequential_simulations", lambda spec: [])
    with caplog.at_level(logging.WARNING, logger="src.model.monte_carlo"):
        results = run_experiment(spec, parallel=False)
    assert "Exhaustive search disabled for L=9" in caplog.text
    assert results["results_df"].empty
    assert results["summary_df"].empty


def _rows():
    base = {"trial_seed": 1, "transmit_power_mW": 1.0, "iterations": 2, "wall_time_ms": 1.0}
    return pd.DataFrame([
        {**base, "method": "proposed", "sweep_value": 1.0, "trial": 0, "network_power_mW": 10.0,
         "active_count": 1, "status": "solved"},
        {**base, "method": "proposed", "sweep_value": 1.0, "trial": 1, "network_power_mW": 30.0,
         "active_count": 3, "status": "solved"},
        {**base, "method": "proposed", "sweep_value": 1.0, "trial": 2, "network_power_mW": np.nan,
         "active_count": -1, "status": "infeasible"},
        {**base, "method": "all_active", "sweep_value": 1.0, "trial": 0, "network_power_mW": np.nan,
         "active_count": -1, "status": "numerical_limit"},
    ], columns=RESULT_COLUMNS)


def test_summary_means_cover_solved_trials_only():
    summary = calculate_monte_carlo_summary(_rows())
    proposed = summary[summary["method"] == "proposed"].iloc[0]
    assert (proposed["trials"], proposed["solved"], proposed["infeasible"], proposed["failed"]) == (3, 2, 1, 0)
    assert proposed["mean_network_power_mW"] == pytest.approx(20.0)
    assert proposed["mean_network_power_dBm"] == pytest.approx(mw_to_dbm(20.0))
    assert proposed["mean_active_count"] == pytest.approx(2.0)

    baseline = summary[summary["method"] == "all_active"].iloc[0]
    assert baseline["failed"] == 1
    assert np.isnan(baseline["mean_network_power_mW"])
    assert np.isnan(baseline["mean_network_power_dBm"])


def test_summary_of_no_rows_is_empty():
    summary = calculate_monte_carlo_summary(pd.DataFrame(columns=RESULT_COLUMNS))
    assert summary.empty
    assert "mean_network_power_dBm" in summary.columns


def test_all_trials_infeasible():
    rows = _rows()
    assert not all_trials_infeasible({"results_df": rows, "summary_df": pd.DataFrame()})
    rows["status"] = "infeasible"
    assert all_trials_infeasible({"results_df": rows, "summary_df": pd.DataFrame()})


def test_metadata_echoes_the_scenario(tiny_spec, tiny_config):
    results = {"results_df": _rows(), "summary_df": calculate_monte_carlo_summary(_rows())}
    metadata = build_metadata(tiny_spec, results)
    assert metadata["rng_algorithm"] == "numpy.random.Philox"
    assert metadata["columns"] == RESULT_COLUMNS
    assert metadata["experiment"]["trials"] == 2
    reloaded, _ = load_config_dict(metadata["config"])
    assert reloaded == tiny_config


def test_write_results(tmp_path, tiny_spec):
    results = {"results_df": _rows(), "summary_df": calculate_monte_carlo_summary(_rows())}
    csv_path, metadata_path = write_results(tiny_spec, results, str(tmp_path / "out"))
    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == RESULT_COLUMNS
    assert len(frame) == 4
    with open(metadata_path, encoding="utf-8") as handle:
        metadata = json.load(handle)
    assert metadata["methods_run"] == ["proposed", "all_active", "exhaustive"]
    assert metadata["summary"][1]["mean_network_power_mW"] is None


@pytest.mark.slow
def test_power_grows_with_the_rate_target(tiny_config):
    spec = ExperimentSpec(base=tiny_config, sweep_variable="rate", sweep_values=(1.0, 3.0),
                          methods=("all_active",), trials=10, master_seed=3, options=FAST)
    summary = run_experiment(spec, parallel=False)["summary_df"]
    means = summary.set_index("sweep_value")["mean_transmit_power_mW"]
    assert means.loc[3.0] > means.loc[1.0]


@pytest.mark.slow
def test_parallel_run_matches_sequential(tiny_spec):
    sequential = run_experiment(tiny_spec, parallel=False)["results_df"].drop(columns="wall_time_ms")
    parallel = run_experiment(tiny_spec, parallel=True, n_jobs=2)["results_df"].drop(columns="wall_time_ms")
    pd.testing.assert_frame_equal(sequential, parallel)


@pytest.mark.slow
def test_default_scenario_trials_are_feasible(evaluation_config):
    spec = ExperimentSpec(base=evaluation_config, sweep_variable="rate", sweep_values=(2.0,),
                          methods=("all_active",), trials=3, master_seed=42, options=FAST)
    rows = run_experiment(spec, parallel=False)["results_df"]
    assert list(rows["status"]) == ["solved"] * 3


def _paired_means(config, variable, values, trials=6):
    """Mean proposed network power per sweep value over trials solved at every value."""
    spec = ExperimentSpec(base=config, sweep_variable=variable, sweep_values=values, methods=("proposed",),
                          trials=trials, master_seed=17, options=FAST)
    rows = run_experiment(spec, parallel=False)["results_df"]
    table = rows.pivot(index="trial", columns="sweep_value", values="network_power_mW")
    solved = rows.pivot(index="trial", columns="sweep_value", values="status").eq("solved").all(axis=1)
    assert solved.sum() >= trials // 2
    return table[solved].mean().to_numpy()


def _ordered(means, slack=0.02):
    """Non-decreasing, allowing a single adjacent reversal within the relative slack."""
    drops = [later < earlier for earlier, later in zip(means, means[1:])]
    small = [later >= earlier * (1.0 - slack) for earlier, later in zip(means, means[1:])]
    return all(small) and sum(drops) <= 1


@pytest.fixture
def desk_config():
    return validate_config(SCENARIOS / "desk.json")[0]


@pytest.mark.slow
def test_proposed_power_grows_with_users(desk_config):
    assert _ordered(_paired_means(desk_config, "K", (2, 3, 4)))


@pytest.mark.slow
def test_proposed_power_falls_with_antennas(desk_config):
    assert _ordered(_paired_means(desk_config, "M", (6, 8, 10))[::-1])


@pytest.mark.slow
def test_proposed_power_grows_with_the_rate_target(desk_config):
    assert _ordered(_paired_means(desk_config, "rate", (1.0, 2.0, 3.0)))
