"""
Command line for the RIS green network simulator.

    python -m src.cli run --sweep K --values 2,3,4 --trials 20 --out results
    python -m src.cli check-config --config scenarios/desk.json
    python -m src.cli demo

Exit codes: 0 success, 1 configuration error, 2 every trial infeasible,
3 numerical failure.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional, Sequence

from src import __version__
from src.errors import ConfigError, InfeasibleError, NumericalLimitError, RisModelError, StructuralError
from src.model.monte_carlo import (
    ExperimentSpec,
    all_trials_infeasible,
    draw_realization,
    run_experiment,
    trial_seed,
    write_results,
)
from src.model.network_model import SystemConfig
from src.model.orchestrate import FEASIBILITY_MODES, AlgorithmOptions, run_method
from src.utils.config import LOG_FORMAT, N_PARALLEL_JOBS, OUTPUT_DIR_ENV_VAR
from src.utils.conversion_utils import format_power
from src.utils.parameters import (
    DEFAULT_EPSILON_MW,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_RANDOM_SEED,
    DEFAULT_RANDOMIZATION_SAMPLES,
    DEFAULT_TRIALS,
    EXHAUSTIVE_AUTO_DISABLE_RIS,
    METHODS,
    SWEEP_VARIABLES,
)
from src.utils.scenario_loader import default_config, validate_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3


def _csv_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _parse_values(text: str, variable: str) -> List[float]:
    values = []
    for item in _csv_list(text):
        number = float(item)
        values.append(int(number) if variable in ("K", "M") and number.is_integer() else number)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-green",
        description="Network power minimisation with on/off RIS selection",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log solver and algorithm details")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a Monte Carlo sweep and write results.csv and metadata.json")
    run.add_argument("--config", help="Scenario JSON file (defaults to the evaluation setup)")
    run.add_argument("--sweep", choices=SWEEP_VARIABLES, required=True, help="Variable to sweep")
    run.add_argument("--values", required=True, help="Comma-separated, strictly increasing sweep values")
    run.add_argument("--methods", default=",".join(METHODS), help="Comma-separated subset of " + ", ".join(METHODS))
    run.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="Trials per sweep value")
    run.add_argument("--seed", type=int, default=DEFAULT_RANDOM_SEED, help="Master seed (unsigned 64-bit)")
    run.add_argument("--out", help=f"Output directory (defaults to ${OUTPUT_DIR_ENV_VAR} or ./results)")
    run.add_argument("--fix-users", action="store_true", help="Place users once per master seed")
    run.add_argument("--force-exhaustive", action="store_true",
                     help=f"Keep exhaustive search even when L > {EXHAUSTIVE_AUTO_DISABLE_RIS}")
    _add_algorithm_arguments(run)
    run.add_argument("--jobs", type=int, default=1, help=f"Worker processes for trials (e.g. {N_PARALLEL_JOBS})")

    check = sub.add_parser("check-config", help="Validate a scenario file and list defaulted fields")
    check.add_argument("--config", required=True, help="Scenario JSON file")

    demo = sub.add_parser("demo", help="Run every method once and print the power breakdown")
    demo.add_argument("--config", help="Scenario JSON file (defaults to the evaluation setup)")
    demo.add_argument("--seed", type=int, default=DEFAULT_RANDOM_SEED, help="Master seed")
    _add_algorithm_arguments(demo)
    return parser


def _add_algorithm_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON_MW,
                        help="Stop when network power drops by less than this (mW)")
    parser.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITERATIONS, help="Alternation iteration cap")
    parser.add_argument("--samples", type=int, default=DEFAULT_RANDOMIZATION_SAMPLES,
                        help="Gaussian randomization samples")
    parser.add_argument("--feasibility-mode", choices=FEASIBILITY_MODES, default=FEASIBILITY_MODES[0],
                        help="How bisection steps are checked")
    parser.add_argument("--random-init", action="store_true", help="Start from random phases instead of zero")


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def _load(path: Optional[str]) -> SystemConfig:
    if path is None:
        return default_config()
    config, diagnostics = validate_config(path)
    for line in diagnostics:
        logger.debug("%s: %s", path, line)
    return config


def _options(args: argparse.Namespace, n_jobs: int = 1) -> AlgorithmOptions:
    return AlgorithmOptions(
        epsilon_mW=args.epsilon,
        max_iter=args.max_iter,
        samples=args.samples,
        feasibility_mode=args.feasibility_mode,
        random_init=args.random_init,
        n_jobs=n_jobs,
    )


def output_directory(flag: Optional[str]) -> str:
    """--out wins over the environment variable, which wins over ./results."""
    if flag:
        return flag
    return os.environ.get(OUTPUT_DIR_ENV_VAR) or "results"


def cmd_run(args: argparse.Namespace) -> int:
    config = _load(args.config)
    spec = ExperimentSpec(
        base=config,
        sweep_variable=args.sweep,
        sweep_values=tuple(_parse_values(args.values, args.sweep)),
        methods=tuple(_csv_list(args.methods)),
        trials=args.trials,
        master_seed=args.seed,
        fix_users=args.fix_users,
        force_exhaustive=args.force_exhaustive,
        options=_options(args),
    )
    results = run_experiment(spec, parallel=args.jobs > 1, n_jobs=args.jobs)
    csv_path, metadata_path = write_results(spec, results, output_directory(args.out))
    print(results["summary_df"].to_string(index=False))
    print(f"\nWrote {csv_path} and {metadata_path}")

    statuses = results["results_df"]["status"]
    if all_trials_infeasible(results):
        if statuses.eq("numerical_limit").any() and not statuses.eq("infeasible").any():
            return EXIT_NUMERICAL
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_check_config(args: argparse.Namespace) -> int:
    config, diagnostics = validate_config(args.config)
    print(f"{args.config}: valid")
    print(f"  M={config.M} K={config.K} L={config.L} N={list(config.N)} eta={config.eta}")
    print(f"  P_max={format_power(config.P_max)} P_RE={format_power(config.P_RE)} P_BS={format_power(config.P_BS)}")
    print(f"  sigma2={[format_power(s) for s in config.sigma2]}")
    print(f"  gamma={list(config.gamma)}")
    for line in diagnostics:
        print(f"  {line}")
    return EXIT_OK


def cmd_demo(args: argparse.Namespace) -> int:
    config, channels, algorithm_seed = draw_realization(_load(args.config), trial_seed(args.seed, 0))
    options = _options(args)
    methods = [m for m in METHODS if m != "exhaustive" or config.L <= EXHAUSTIVE_AUTO_DISABLE_RIS]
    solved = 0
    numerical = 0
    print(f"M={config.M} K={config.K} L={config.L} N={list(config.N)} seed={args.seed}")
    for method in methods:
        try:
            solution, extras = run_method(method, channels, config, options, algorithm_seed)
        except InfeasibleError as exc:
            print(f"\n{method}: infeasible ({exc})")
            continue
        except NumericalLimitError as exc:
            print(f"\n{method}: numerical failure ({exc})")
            numerical += 1
            continue
        solved += 1
        print(f"\n{method} ({extras['iterations']} iterations)")
        print(f"  active RISs:      {list(solution.active.indices)}")
        print(f"  transmit power:   {format_power(solution.transmit_power_mW)}")
        print(f"  RIS circuit:      {format_power(solution.ris_circuit_power_mW)}")
        print(f"  network power:    {format_power(solution.network_power_mW)}")
        print(f"  total incl. BS:   {format_power(solution.total_power_mW)}")
    if solved:
        return EXIT_OK
    return EXIT_NUMERICAL if numerical else EXIT_INFEASIBLE


COMMANDS = {
    "run": cmd_run,
    "check-config": cmd_check_config,
    "demo": cmd_demo,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error in {getattr(args, 'config', None) or 'defaults'}:", file=sys.stderr)
        for issue in exc.issues:
            print(f"  {issue}", file=sys.stderr)
        return EXIT_CONFIG
    except (StructuralError, ValueError) as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read or write: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalLimitError, RisModelError) as exc:
        logger.exception("Run failed")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
