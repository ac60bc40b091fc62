"""
Monte Carlo sweeps for the RIS green network simulator.

This module runs every requested method on identical channel realizations
across a sweep of K, M or the target rate, and writes the per-trial rows and
per-point summaries to CSV with a JSON metadata sidecar.
"""

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple, TypedDict

import numpy as np
import pandas as pd

from src import __version__
from src.errors import InfeasibleError, NumericalLimitError, StructuralError
from src.model.channel import generate_channels, place_users
from src.model.network_model import ChannelSet, SystemConfig, check_feasible, rate_to_sinr
from src.model.orchestrate import AlgorithmOptions, run_method
from src.utils.config import (
    CSV_FLOAT_FORMAT,
    MAX_MONTE_CARLO_TRIALS,
    METADATA_FILENAME,
    N_PARALLEL_JOBS,
    RESULT_COLUMNS,
    RESULTS_FILENAME,
    RNG_ALGORITHM,
    USE_PARALLEL_COMPUTATION,
)
from src.utils.conversion_utils import mw_to_dbm
from src.utils.parameters import (
    DEFAULT_FEASIBILITY_TOL,
    DEFAULT_RANDOM_SEED,
    DEFAULT_TRIALS,
    EXHAUSTIVE_AUTO_DISABLE_RIS,
    METHODS,
    SWEEP_VARIABLES,
)
from src.utils.scenario_loader import config_to_dict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a base scenario, the swept variable and its values, methods and trials."""
    base: SystemConfig
    sweep_variable: str
    sweep_values: Tuple[float, ...]
    methods: Tuple[str, ...] = METHODS
    trials: int = DEFAULT_TRIALS
    master_seed: int = DEFAULT_RANDOM_SEED
    fix_users: bool = False
    force_exhaustive: bool = False
    options: AlgorithmOptions = field(default_factory=AlgorithmOptions)

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise StructuralError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.sweep_variable!r}")
        if not self.sweep_values:
            raise StructuralError("at least one sweep value is required")
        if any(b <= a for a, b in zip(self.sweep_values, self.sweep_values[1:])):
            raise StructuralError(f"sweep values must be strictly increasing, got {self.sweep_values}")
        if self.sweep_variable in ("K", "M"):
            if any(v != int(v) or v < 1 for v in self.sweep_values):
                raise StructuralError(f"{self.sweep_variable} values must be positive integers")
        elif any(v <= 0 for v in self.sweep_values):
            raise StructuralError("rate values must be positive")
        if not 1 <= self.trials <= MAX_MONTE_CARLO_TRIALS:
            raise StructuralError(f"trials must lie in [1, {MAX_MONTE_CARLO_TRIALS}], got {self.trials}")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise StructuralError(f"methods must be a non-empty subset of {METHODS}, got {self.methods}")
        if self.master_seed < 0:
            raise StructuralError("master seed must be an unsigned integer")

    @property
    def exhaustive_disabled(self) -> bool:
        return "exhaustive" in self.methods and self.base.L > EXHAUSTIVE_AUTO_DISABLE_RIS and not self.force_exhaustive

    def effective_methods(self) -> Tuple[str, ...]:
        """Requested methods, minus exhaustive search when L is too large and not forced."""
        if self.exhaustive_disabled:
            return tuple(m for m in self.methods if m != "exhaustive")
        return self.methods

    def config_at(self, value: float) -> SystemConfig:
        """Base scenario with the swept variable set to `value`."""
        if self.sweep_variable == "K":
            return self.base.with_users(int(value))
        if self.sweep_variable == "M":
            return replace(self.base, M=int(value))
        return self.base.with_gamma(rate_to_sinr(value))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sweep_variable": self.sweep_variable,
            "sweep_values": list(self.sweep_values),
            "methods": list(self.methods),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "fix_users": self.fix_users,
            "force_exhaustive": self.force_exhaustive,
            "epsilon_mW": self.options.epsilon_mW,
            "max_iter": self.options.max_iter,
            "randomization_samples": self.options.samples,
            "feasibility_mode": self.options.feasibility_mode,
            "random_init": self.options.random_init,
        }


class MonteCarloResults(TypedDict):
    """Results of a Monte Carlo sweep."""
    results_df: pd.DataFrame  # One row per (method, value, trial)
    summary_df: pd.DataFrame  # Per (method, value) means over solved trials


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed of one trial; shared by every sweep value so points see common random numbers."""
    state = np.random.SeedSequence([int(master_seed), int(trial)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def draw_realization(config: SystemConfig, seed: int,
                     placement: Optional[np.random.SeedSequence] = None) -> Tuple[SystemConfig, ChannelSet, int]:
    """
    Place users and draw channels for one trial seed.

    The trial seed is split into placement, fading and algorithm streams;
    `placement` overrides the first when users are held fixed.

    Returns:
        (config with user positions, channels, algorithm seed)
    """
    placement_stream, fading, algorithm = np.random.SeedSequence(seed).spawn(3)
    if placement is not None:
        placement_stream = placement
    geometry = place_users(config, placement_stream)
    config = replace(config, geometry=geometry)
    channels = generate_channels(config, geometry, fading)
    return config, channels, int(algorithm.generate_state(1, dtype=np.uint64)[0])


def run_trial(spec: ExperimentSpec, value: float, trial: int) -> List[Dict[str, Any]]:
    """
    Run every method on one channel realization.

    Returns:
        One row per method, keyed by RESULT_COLUMNS
    """
    seed = trial_seed(spec.master_seed, trial)
    placement = np.random.SeedSequence([int(spec.master_seed)]).spawn(1)[0] if spec.fix_users else None
    config, channels, algorithm_seed = draw_realization(spec.config_at(value), seed, placement)

    rows = []
    for method in spec.effective_methods():
        start = time.perf_counter()
        row: Dict[str, Any] = {
            "method": method,
            "sweep_value": value,
            "trial": trial,
            "trial_seed": seed,
            "network_power_mW": np.nan,
            "transmit_power_mW": np.nan,
            "active_count": -1,
            "iterations": 0,
        }
        try:
            solution, extras = run_method(method, channels, config, spec.options, algorithm_seed)
            report = check_feasible(solution, config, channels, DEFAULT_FEASIBILITY_TOL)
            row.update({
                "network_power_mW": solution.network_power_mW,
                "transmit_power_mW": solution.transmit_power_mW,
                "active_count": solution.active.count,
                "iterations": extras["iterations"],
                "status": "solved" if report.feasible else "constraint_violation",
            })
            if not report.feasible:
                logger.warning("%s trial %d at %s=%s violates its constraints (min SINR margin %.3e)",
                               method, trial, spec.sweep_variable, value, float(report.sinr_margin.min()))
        except InfeasibleError as exc:
            logger.info("%s trial %d at %s=%s infeasible: %s", method, trial, spec.sweep_variable, value, exc)
            row["status"] = "infeasible"
        except (NumericalLimitError, ArithmeticError, np.linalg.LinAlgError) as exc:
            logger.warning("%s trial %d at %s=%s hit a numerical limit: %s",
                           method, trial, spec.sweep_variable, value, exc)
            row["status"] = "numerical_limit"
        row["wall_time_ms"] = (time.perf_counter() - start) * 1000.0
        rows.append(row)
    return rows


def _run_task(task: Tuple[ExperimentSpec, float, int]) -> List[Dict[str, Any]]:
    return run_trial(*task)


def run_sequential_simulations(spec: ExperimentSpec) -> List[Dict[str, Any]]:
    """
    Run every (value, trial) cell in this process.

    Args:
        spec: Experiment to run

    Returns:
        List of result rows
    """
    rows: List[Dict[str, Any]] = []
    for value in spec.sweep_values:
        for trial in range(spec.trials):
            rows.extend(run_trial(spec, value, trial))
        logger.info("Finished %s=%s (%d trials)", spec.sweep_variable, value, spec.trials)
    return rows


def run_parallel_simulations(spec: ExperimentSpec, n_jobs: int = N_PARALLEL_JOBS) -> List[Dict[str, Any]]:
    """
    Run the (value, trial) cells in a process pool.

    Rows are sorted afterwards, so the output does not depend on scheduling.
    """
    tasks = [(spec, value, trial) for value in spec.sweep_values for trial in range(spec.trials)]
    rows: List[Dict[str, Any]] = []
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        for chunk in pool.map(_run_task, tasks):
            rows.extend(chunk)
    return rows


def run_experiment(spec: ExperimentSpec, parallel: Optional[bool] = None,
                   n_jobs: int = N_PARALLEL_JOBS) -> MonteCarloResults:
    """
    Run a sweep.

    Args:
        spec: Experiment to run
        parallel: Use a process pool (defaults to USE_PARALLEL_COMPUTATION)
        n_jobs: Worker processes when parallel

    Returns:
        Dictionary with the sorted result rows and the per-point summary
    """
    if spec.exhaustive_disabled:
        logger.warning("Exhaustive search disabled for L=%d > %d; set force_exhaustive to keep it",
                       spec.base.L, EXHAUSTIVE_AUTO_DISABLE_RIS)
    if parallel is None:
        parallel = USE_PARALLEL_COMPUTATION
    if parallel and n_jobs > 1:
        rows = run_parallel_simulations(spec, n_jobs)
    else:
        rows = run_sequential_simulations(spec)

    order = {method: i for i, method in enumerate(METHODS)}
    rows.sort(key=lambda r: (order[r["method"]], r["sweep_value"], r["trial"]))
    results_df = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return {
        "results_df": results_df,
        "summary_df": calculate_monte_carlo_summary(results_df),
    }


def calculate_monte_carlo_summary(results_df: pd.DataFrame) -> pd.DataFrame:
    """
    Per (method, sweep value) summary.

    Means are taken over solved trials only; infeasible and failed trials are
    counted separately.

    Args:
        results_df: Rows produced by run_experiment

    Returns:
        DataFrame with one row per (method, sweep_value)
    """
    columns = ["method", "sweep_value", "trials", "solved", "infeasible", "failed",
               "mean_network_power_mW", "mean_network_power_dBm", "mean_transmit_power_mW",
               "mean_active_count", "mean_iterations"]
    if results_df.empty:
        return pd.DataFrame(columns=columns)

    status = results_df["status"]
    frame = results_df.assign(
        solved=status.eq("solved"),
        infeasible=status.eq("infeasible"),
        failed=~status.isin(["solved", "infeasible"]),
    )
    solved = frame[frame["solved"]]
    keys = ["method", "sweep_value"]
    counts = frame.groupby(keys, sort=False).agg(
        trials=("trial", "size"),
        solved=("solved", "sum"),
        infeasible=("infeasible", "sum"),
        failed=("failed", "sum"),
    )
    means = solved.groupby(keys, sort=False).agg(
        mean_network_power_mW=("network_power_mW", "mean"),
        mean_transmit_power_mW=("transmit_power_mW", "mean"),
        mean_active_count=("active_count", "mean"),
        mean_iterations=("iterations", "mean"),
    )
    summary = counts.join(means, how="left").reset_index()
    summary["mean_network_power_dBm"] = summary["mean_network_power_mW"].map(
        lambda p: mw_to_dbm(p) if np.isfinite(p) else np.nan
    )
    return summary[columns]


def all_trials_infeasible(results: MonteCarloResults) -> bool:
    """True when no row was solved."""
    return not results["results_df"]["status"].eq("solved").any()


def build_metadata(spec: ExperimentSpec, results: MonteCarloResults) -> Dict[str, Any]:
    """Metadata sidecar: version, RNG, echoed config and spec, per-point summaries."""
    summary = results["summary_df"].replace({np.nan: None})
    return {
        "artifact_version": __version__,
        "rng_algorithm": RNG_ALGORITHM,
        "config": config_to_dict(spec.base),
        "experiment": spec.to_dict(),
        "methods_run": list(spec.effective_methods()),
        "columns": RESULT_COLUMNS,
        "summary": summary.to_dict(orient="records"),
    }


def write_results(spec: ExperimentSpec, results: MonteCarloResults, out_dir: str) -> Tuple[str, str]:
    """
    Write results.csv and metadata.json into `out_dir`.

    Returns:
        (csv_path, metadata_path)
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, RESULTS_FILENAME)
    metadata_path = os.path.join(out_dir, METADATA_FILENAME)
    results["results_df"].to_csv(csv_path, index=False, float_format=CSV_FLOAT_FORMAT)
    with open(metadata_path, "w", encoding="utf-8") as handle:
        json.dump(build_metadata(spec, results), handle, indent=2, sort_keys=True, default=_json_default)
        handle.write("\n")
    logger.info("Wrote %s and %s", csv_path, metadata_path)
    return csv_path, metadata_path


def _json_default(value: Any) -> Any:
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")
