"""Command-line front end: parse flags, resolve the config, run, write the report."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from ..config.environment import LOG_LEVELS, get_log_level
from ..config.settings_manager import load_experiment_config
from ..exceptions import BaseLabException, CapacityError, ConfigurationError
from ..models.schemas import ExperimentKind, ExperimentReport
from .experiments import run
from .report_writer import render, render_plot_table, write_atomic

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_INTERNAL = 4


def handle_experiment_error(error: Exception) -> int:
    """Map an error onto the process exit code; errors outside the lab hierarchy get EXIT_INTERNAL."""
    if isinstance(error, CapacityError):
        logger.error("Capacity exceeded: %s", error)
        return EXIT_CAPACITY

    if isinstance(error, ConfigurationError):
        logger.error("Invalid configuration: %s", error)
        return EXIT_USAGE

    if isinstance(error, BaseLabException):
        logger.error("%s: %s", type(error).__name__, error)
        return EXIT_USAGE

    logger.exception("Unexpected error while running the experiment: %s", error)
    return EXIT_INTERNAL


def _widths(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"widths must be comma-separated integers, got {text!r}") from e


def _shared_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="JSON config file, or a previously written report")
    parent.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")
    parent.add_argument("--trials", type=int, help="Monte Carlo trials")
    parent.add_argument("--widths", type=_widths, help="Layer widths d_0,...,d_{H+1}")
    parent.add_argument("--scheme", help="Scheme token, e.g. even-uniform or he-normal:fan-out")
    parent.add_argument("--out", help="Report path (stdout when omitted)")
    parent.add_argument("--format", choices=["json", "csv"], help="Report format")
    parent.add_argument("--log-level", choices=LOG_LEVELS, help="Log level (default from EVENINIT_LOG_LEVEL)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evenlab", description="Even-initialization verification lab")
    subparsers = parser.add_subparsers(dest="kind", required=True, metavar="EXPERIMENT")
    parent = _shared_flags()
    for kind in ExperimentKind:
        subparsers.add_parser(kind.value, parents=[parent], help=f"run the {kind.value} experiment")
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    """Config fragment set by flags; unset flags stay None and do not override."""
    return {
        "kind": args.kind,
        "seed": args.seed,
        "trials": args.trials,
        "scheme": args.scheme,
        "network": {"widths": args.widths},
        "output": {"path": args.out, "format": args.format},
    }


def write_report(report: ExperimentReport, path: Optional[str], fmt: str, plot_path: Optional[str]) -> None:
    text = render(report, fmt)
    if path:
        write_atomic(Path(path), text)
    else:
        sys.stdout.write(text)
    if plot_path:
        write_atomic(Path(plot_path), render_plot_table(report))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=args.log_level or get_log_level(),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config = load_experiment_config(args.config, overrides_from_args(args))
        report = run(config)
        write_report(report, config.output.path, config.output.format, config.output.plot_table)
    except Exception as e:
        return handle_experiment_error(e)
    return EXIT_OK if report.passed else EXIT_VERDICT_FAILED
