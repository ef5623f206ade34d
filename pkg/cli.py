"""Command line interface for dockmpc.

Subcommands:
    run               Run one scenario (preset or JSON config) and export results
    compare           Run the coupled and the baseline logistics scenario
    check-gradients   Compare AD derivatives against finite differences

Exit codes: 0 success, 1 scenario timeout, 2 configuration or file error,
3 solver numeric error or failed gradient check.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
import argparse
import logging
import os
import sys

import numpy as np

import common.constants as const
from common.helper import configure_logging, time_str
from planning.nlp import check_gradient, random_instance
from scenarios.config import ConfigError, ScenarioConfig, load_config
from scenarios.export import export_comparison, export_run
from scenarios.presets import preset, preset_names
from simulation.executor import SolverNumericError, run_scenario
from simulation.trajectory import ScenarioOutcome

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TIMEOUT = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

def _init_argparse() -> argparse.ArgumentParser:
    """Creates and returns argument parser

        Returns:
            ArgumentParser for dockmpc
    """
    my_parser = argparse.ArgumentParser(prog='dockmpc',
                                        description=('In-motion docking of two omnidirectional'
                                                     ' robots with model predictive control'))
    my_parser.add_argument('-v', '--verbose', action='count', default=0)
    my_parser.add_argument('--log-file', action='store_true',
                           help="Also write log_dockmpc_<time>.log")

    subparser = my_parser.add_subparsers(title='Subcommands',
                                         description='run, compare, check-gradients',
                                         dest='sub')

    run_parser = subparser.add_parser('run', help="Run one scenario")
    source = run_parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--preset', choices=preset_names(),
                        help="Built-in scenario")
    source.add_argument('--config', type=str,
                        help="Scenario configuration as JSON")
    run_parser.add_argument('--out', type=str, default='out',
                            help="Output directory")
    run_parser.add_argument('--seed', type=int, default=None,
                            help="Override the scenario seed")

    compare_parser = subparser.add_parser('compare', help="Coupled against baseline logistics")
    compare_parser.add_argument('--preset', choices=['exp3'], default='exp3')
    compare_parser.add_argument('--out', type=str, default='out')
    compare_parser.add_argument('--parallel', action='store_true',
                                help="Run both scenarios in a process pool")

    grad_parser = subparser.add_parser('check-gradients', help="Verify derivatives")
    grad_parser.add_argument('--trials', type=int, default=const.GRADIENT_CHECK_TRIALS)
    grad_parser.add_argument('--seed', type=int, default=0)

    return my_parser

def _log_success() -> None:
    """Logs success on program exit."""
    logger.info("All actions succeeded.")
    logger.info("Terminating dockmpc with exit code 0 at %s", time_str())

def _load(preset_name: str | None, config_path: str | None) -> ScenarioConfig:
    if preset_name is not None:
        return preset(preset_name)
    return load_config(config_path)

def _outcome_code(outcome: ScenarioOutcome) -> int:
    return EXIT_TIMEOUT if outcome is ScenarioOutcome.TIMEOUT else EXIT_OK

def _run_handle(preset_name: str | None, config_path: str | None,
                out_dir: str, seed: int | None) -> int:
    """Handles run command

        Args:
            - preset_name (str): Name of a built-in scenario or None
            - config_path (str): Path to a JSON configuration or None
            - out_dir (str): Directory for the result files
            - seed (int): Seed override or None

        Returns:
            int: Exit code
    """
    logger.debug("Called _run_handle()")

    try:
        config = _load(preset_name, config_path)
    except ConfigError as err:
        logger.critical("Invalid configuration: %s", err)
        return EXIT_CONFIG
    if seed is not None:
        config = replace(config, seed=seed)

    try:
        log, report = run_scenario(config)
    except SolverNumericError as err:
        logger.critical("Scenario %s aborted: %s", config.name, err)
        return EXIT_NUMERIC

    try:
        export_run(log, report, out_dir)
    except OSError as err:
        logger.critical("Unable to write results: %s", err)
        return EXIT_CONFIG

    print(f"{report.name}: {report.outcome}, time {report.total_time:.2f} s, "
          f"energy {report.total_energy:.2f} J, distance {report.total_distance:.2f} m")
    return _outcome_code(log.outcome)

def _compare_handle(out_dir: str, parallel: bool) -> int:
    """Handles compare command

        Args:
            - out_dir (str): Directory receiving coupled/, baseline/ and the table
            - parallel (bool): Run both scenarios concurrently

        Returns:
            int: Exit code
    """
    logger.debug("Called _compare_handle()")
    configs = [preset("exp3_coupled"), preset("exp3_baseline")]

    try:
        if parallel:
            with ProcessPoolExecutor(max_workers=len(configs)) as pool:
                results = list(pool.map(run_scenario, configs))
        else:
            results = [run_scenario(c) for c in configs]
    except SolverNumericError as err:
        logger.critical("Comparison aborted: %s", err)
        return EXIT_NUMERIC

    (coupled_log, coupled), (baseline_log, baseline) = results
    try:
        export_run(coupled_log, coupled, os.path.join(out_dir, "coupled"))
        export_run(baseline_log, baseline, os.path.join(out_dir, "baseline"))
        table = export_comparison(baseline, coupled, os.path.join(out_dir, const.COMPARISON_FILE))
    except OSError as err:
        logger.critical("Unable to write results: %s", err)
        return EXIT_CONFIG

    print(table.to_string(index=False, float_format=lambda v: f"{v:.2f}"))
    return max(_outcome_code(coupled_log.outcome), _outcome_code(baseline_log.outcome))

def _check_gradients_handle(trials: int, seed: int) -> int:
    """Handles check-gradients command

        Note:
            Horizons alternate between 5 and 20 steps.

        Returns:
            int: Exit code, 0 if every error is below GRADIENT_CHECK_TOL
    """
    logger.debug("Called _check_gradients_handle()")
    if trials < 1:
        logger.critical("Number of trials must be positive, got %d", trials)
        return EXIT_CONFIG

    rng = np.random.default_rng(seed)
    worst = 0.0
    for trial in range(trials):
        problem, x = random_instance(rng, 5 if trial % 2 == 0 else 20)
        worst = max(worst, check_gradient(problem, x))
    print(f"max relative derivative error over {trials} instances: {worst:.3e}")
    if worst >= const.GRADIENT_CHECK_TOL:
        logger.critical("Gradient check failed: %.3e >= %.1e", worst, const.GRADIENT_CHECK_TOL)
        return EXIT_NUMERIC
    return EXIT_OK

def run_cli(argv=None) -> int:
    """Parses arguments, runs the subcommand and returns the exit code

        Args:
            - argv (list): Arguments without the program name, sys.argv[1:] if None
    """
    parser = _init_argparse()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.log_file)

    if args.sub == 'run':
        logger.debug("Invoking run handle.")
        code = _run_handle(args.preset, args.config, args.out, args.seed)
    elif args.sub == 'compare':
        logger.debug("Invoking compare handle.")
        code = _compare_handle(args.out, args.parallel)
    elif args.sub == 'check-gradients':
        logger.debug("Invoking check-gradients handle.")
        code = _check_gradients_handle(args.trials, args.seed)
    else:
        parser.print_help()
        logger.critical("Invalid argument passed: %s", args.sub)
        return EXIT_CONFIG

    if code == EXIT_OK:
        _log_success()
    else:
        logger.critical("Terminating dockmpc with exit code %d at %s", code, time_str())
    return code

def cli_main(*args) -> None:
    """Entry point for command line interface

        Args:
            - *args: Arguments passed by command line, program name first
    """
    argv = list(args[0][1:]) if args else None
    sys.exit(run_cli(argv))
