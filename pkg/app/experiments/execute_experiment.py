"""
Command-line front end of the noise-truncation error lab.

Usage:
    python execute_experiment.py simulate --config configs/wave_additive.toml
    python execute_experiment.py rates --out results
    python execute_experiment.py oracle --q 1 --levels 16,64,256,1024
    python execute_experiment.py bounds --config configs/wave_multiplicative.toml
    python execute_experiment.py demo wave_additive
"""

import argparse
import glob
import logging
import os
from typing import List, Optional

from app.coefficients.diffusion import tail_ratio_bound
from app.coefficients.lambdas import ExplicitLambdas, PowerLawLambdas
from app.error_lab.ErrorEstimator_class import ErrorEstimator
from app.error_lab.constants import bound_constants
from app.error_lab.functionals import make_functional
from app.error_lab.gaussian_oracle import sharpness_ratios
from app.error_lab.rates import fit_rate
from app.experiments.experiment_builder import build_equation, build_plan, build_stepper
from app.experiments.experiment_config import LoadedConfig, load_config
from app.experiments.experiment_utils import (
    REPORT_SUFFIX,
    SUMMARY_SUFFIX,
    build_summary,
    format_table,
    load_reports,
    write_report_csv,
    write_summary_json,
)
from app.utils.errors import BudgetExceededError, ConfigurationError
from app.utils.run_budget import check_budget, estimate_run_cost, print_run_usage

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

SEED_ENVIRONMENT_VARIABLE = "SPDE_LAB_SEED"
CONFIGS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "..", "configs")
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def resolve_seed(cli_seed: Optional[int], config_seed: Optional[int], environ=os.environ) -> int:
    """--seed, then the config, then SPDE_LAB_SEED, then 0."""
    if cli_seed is not None:
        return cli_seed
    if config_seed is not None:
        return config_seed
    value = environ.get(SEED_ENVIRONMENT_VARIABLE)
    if value:
        try:
            return int(value)
        except ValueError as e:
            raise ConfigurationError(f"{SEED_ENVIRONMENT_VARIABLE} must be an integer, got '{value}'") from e
    return 0


def parse_levels(text: str) -> List[int]:
    if not text.strip():
        return []
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigurationError(f"Levels must be comma-separated integers, got '{text}'") from e


def run_simulation(
    loaded: LoadedConfig, seed: Optional[int] = None, workers: Optional[int] = None, out: Optional[str] = None
) -> str:
    """
    Run one configured experiment and write its CSV report and JSON summary.

    Returns:
        Path of the written CSV report.

    Raises:
        ConfigurationError: If the config cannot be turned into a run.
        BudgetExceededError: If the estimated cost is above the budget.
    """
    config = loaded.config
    experiment = config.experiment
    # a replayed summary keeps the seed its run actually used
    recorded = loaded.recorded_seed if loaded.recorded_seed is not None else experiment.seed
    effective_seed = resolve_seed(seed, recorded)
    effective_workers = workers or experiment.workers
    spec = build_equation(config, loaded.text)
    collocation = any(getattr(part, "grid", None) is not None for part in (spec.diffusion, spec.drift))
    cost = estimate_run_cost(
        experiment.equation,
        max(experiment.n_ref, spec.state_size),
        experiment.steps,
        experiment.paths,
        len(experiment.levels),
        collocation=collocation,
    )
    check_budget(cost, experiment.budget)
    print_run_usage(cost, experiment.budget)

    functional = make_functional(experiment.functional, spec)
    estimator = ErrorEstimator(spec, build_stepper(config), functional, workers=effective_workers)
    report = estimator.estimate_errors(experiment.levels, experiment.paths, build_plan(config, effective_seed))

    output_dir = out or experiment.output_dir
    report_path = os.path.join(output_dir, f"{config.name}{REPORT_SUFFIX}")
    write_report_csv(report, report_path)
    summary = build_summary(report, loaded, effective_seed, spec.norms.as_dict())
    write_summary_json(summary, os.path.join(output_dir, f"{config.name}{SUMMARY_SUFFIX}"))
    return report_path


def _simulate(args) -> int:
    loaded = load_config(args.config)
    report_path = run_simulation(loaded, seed=args.seed, workers=args.workers, out=args.out)
    print(f"Report written to {report_path}")
    return EXIT_OK


def _rates(args) -> int:
    reports = load_reports(args.out)
    for name, rows in reports.items():
        levels = [row["n"] for row in rows]
        parts = [name]
        for column in ("strong_sq", "weak"):
            errors = [abs(row[column]) for row in rows]
            try:
                parts.append(f"{column} slope {fit_rate(levels, errors).slope:+.4f}")
            except ConfigurationError as e:
                logger.warning(f"{name}: no {column} rate ({e})")
                parts.append(f"{column} slope Unavailable")
        print("  ".join(parts))
    return EXIT_OK


def _oracle(args) -> int:
    if (args.q is None) == (args.lambdas is None):
        raise ConfigurationError("oracle needs exactly one of --q or --lambdas")
    if args.q is not None:
        lambdas = PowerLawLambdas(args.q)
    else:
        lambdas = ExplicitLambdas([float(value) for value in args.lambdas.split(",") if value.strip()])
    rows = sharpness_ratios(lambdas, parse_levels(args.levels))
    print(
        format_table(
            ["n", "phi_mean", "tail", "weak_ratio"],
            [(row.n, row.phi_mean, row.tail, row.weak_ratio) for row in rows],
        )
    )
    return EXIT_OK


def _bounds(args) -> int:
    loaded = load_config(args.config)
    spec = build_equation(loaded.config, loaded.text)
    horizons = [float(value) for value in args.horizons.split(",")] if args.horizons else [spec.horizon]
    rows = []
    for horizon in horizons:
        constants = bound_constants(spec.norms, horizon)
        rows.append((horizon, constants.c1, constants.c2, constants.c3, constants.c4, constants.c, constants.apriori))
    print(format_table(["T", "C1", "C2", "C3", "C4", "C", "apriori"], rows))
    print()
    levels = loaded.config.experiment.levels
    print(
        format_table(
            ["n", "tail_ratio_bound"],
            [(n, tail_ratio_bound(spec.diffusion, spec.tail_space, n)) for n in levels],
        )
    )
    return EXIT_OK


def list_demos(configs_dir: str = CONFIGS_DIR) -> List[str]:
    return sorted(os.path.splitext(os.path.basename(path))[0] for path in glob.glob(os.path.join(configs_dir, "*.toml")))


def _demo(args) -> int:
    demos = list_demos(args.configs_dir)
    if args.list or not args.name:
        print("\n".join(demos))
        return EXIT_OK
    if args.name not in demos:
        raise ConfigurationError(f"Unknown demo '{args.name}', expected one of {demos}")
    loaded = load_config(os.path.join(args.configs_dir, f"{args.name}.toml"))
    report_path = run_simulation(loaded, seed=args.seed, workers=args.workers, out=args.out)
    print(f"Report written to {report_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Measure noise-truncation errors of stochastic evolution equations",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python execute_experiment.py simulate --config configs/wave_additive.toml --workers 4
  python execute_experiment.py rates --out results
  python execute_experiment.py oracle --q 1 --levels 16,64,256,1024
  python execute_experiment.py bounds --config configs/wave_multiplicative.toml --horizons 0.5,1,2
  python execute_experiment.py demo --list
        """,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(subparser):
        subparser.add_argument("--seed", type=int, default=None, help="Seed (overrides config and SPDE_LAB_SEED)")
        subparser.add_argument("--workers", type=int, default=None, help="Worker processes (default: config value)")
        subparser.add_argument("--out", type=str, default=None, help="Output directory (default: config value)")

    simulate = subparsers.add_parser("simulate", help="Run a configured experiment")
    simulate.add_argument("--config", type=str, required=True, help="TOML config or run summary JSON")
    add_run_flags(simulate)
    simulate.set_defaults(handler=_simulate)

    rates = subparsers.add_parser("rates", help="Fit rates of every report in a directory")
    rates.add_argument("--out", type=str, default="results", help="Directory with *_report.csv (default: results)")
    rates.set_defaults(handler=_rates)

    oracle = subparsers.add_parser("oracle", help="Exact Gaussian weak errors of the diagonal model")
    oracle.add_argument("--q", type=float, default=None, help="Power law lambda_k = (k+1)^-q")
    oracle.add_argument("--lambdas", type=str, default=None, help="Explicit comma-separated lambdas")
    oracle.add_argument("--levels", type=str, default="", help="Comma-separated levels")
    oracle.set_defaults(handler=_oracle)

    bounds = subparsers.add_parser("bounds", help="Explicit error-bound constants of a config")
    bounds.add_argument("--config", type=str, required=True, help="TOML config")
    bounds.add_argument("--horizons", type=str, default=None, help="Comma-separated horizons T")
    bounds.set_defaults(handler=_bounds)

    demo = subparsers.add_parser("demo", help="Run a bundled config by name")
    demo.add_argument("name", nargs="?", default=None, help="Demo name (see --list)")
    demo.add_argument("--list", action="store_true", help="List bundled demos")
    demo.add_argument("--configs-dir", type=str, default=CONFIGS_DIR, help=argparse.SUPPRESS)
    add_run_flags(demo)
    demo.set_defaults(handler=_demo)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Dispatch a subcommand and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except BudgetExceededError as e:
        logger.error(f"Run refused: {e}")
        return EXIT_BUDGET
    except (ConfigurationError, ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.error(f"Error during '{args.command}': {e}", exc_info=True)
        return EXIT_FAILURE


if __name__ == "__main__":
    exit(main())
