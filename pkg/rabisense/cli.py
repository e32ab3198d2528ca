"""Command-line front end: one subcommand per pipeline, each writing a CSV and a manifest."""
import argparse
import math
import os
import sys
from typing import Any, List, Optional, Sequence

from texttable import Texttable

from rabisense import __version__
from rabisense.engine.arg_utils import ExperimentArgs
from rabisense.engine.experiments import EXPERIMENTS, ExperimentResult, run_experiment
from rabisense.logger import init_logger, set_verbosity
from rabisense.utils.errors import NumericalError
from rabisense.utils.io import RunManifest, ensure_dir, write_csv

logger = init_logger(__name__)

OUTPUT_DIR_ENV = "RABISENSE_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"
MAX_PRINTED_ROWS = 30

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--output-dir",
        type=str,
        default=None,
        help=f"directory for CSV and manifest (default ${OUTPUT_DIR_ENV} or ./{DEFAULT_OUTPUT_DIR})",
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="console log level",
    )
    return parser


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabisense",
        description="Double-well Rabi interferometry: detuning, sensitivity and fits.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    common = _common_parser()
    for name, fn in EXPERIMENTS.items():
        summary = (fn.__doc__ or "").strip().splitlines()[0]
        sub = subparsers.add_parser(name, parents=[common], help=summary, description=summary)
        ExperimentArgs.add_cli_args(sub)
    return parser


def resolve_output_dir(args: argparse.Namespace) -> str:
    return args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR


def _text(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}" if math.isfinite(value) else str(value)
    return str(value)


def render_table(result: ExperimentResult) -> str:
    table = Texttable(max_width=0)
    table.set_cols_dtype(["t"] * len(result.header))
    table.header(list(result.header))
    rows = result.rows
    if len(rows) > MAX_PRINTED_ROWS:
        rows = rows[:MAX_PRINTED_ROWS]
    table.add_rows([[_text(v) for v in row] for row in rows], header=False)
    text = table.draw()
    if len(result.rows) > len(rows):
        text += f"\n... {len(result.rows) - len(rows)} more rows in the CSV"
    return text


def _print_summary(result: ExperimentResult) -> None:
    if result.name == "crossover":
        print(f"t* = {result.summary['t_star_s']:.2f} s")
    for key, value in result.summary.items():
        if isinstance(value, list):
            for entry in value:
                print(", ".join(f"{k}={_text(v)}" for k, v in entry.items()))
        elif key != "t_star_s":
            print(f"{key} = {_text(value)}")


def execute(args: argparse.Namespace) -> List[str]:
    """Run one parsed subcommand; returns the written paths."""
    cfg = ExperimentArgs.from_cli_args(args)
    output_dir = ensure_dir(resolve_output_dir(args))
    result = run_experiment(args.command, cfg)
    csv_path = write_csv(
        os.path.join(output_dir, f"{result.name}.csv"), result.header, result.rows
    )
    metadata = dict(result.metadata)
    metadata.update(result.summary)
    manifest = RunManifest(
        subcommand=args.command,
        params=cfg.to_params(),
        seed=cfg.seed,
        outputs=[csv_path],
        metadata=metadata,
        version=__version__,
    )
    manifest_path = manifest.write(os.path.join(output_dir, f"{result.name}.manifest.toml"))
    print(render_table(result))
    _print_summary(result)
    return [csv_path, manifest_path]


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Parse `argv`, run the subcommand and map failures onto exit codes."""
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help/--version and 2 for usage errors.
        return int(e.code or 0)
    if args.log_level:
        set_verbosity(args.log_level)
    try:
        execute(args)
    except NumericalError as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
