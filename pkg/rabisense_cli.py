import argparse

from rabisense.cli import execute
from rabisense.engine.arg_utils import ExperimentArgs
from rabisense.engine.experiments import EXPERIMENTS
from rabisense.logger import set_verbosity


def main(args: argparse.Namespace):
    """Run one pipeline and write its CSV and manifest under --output-dir."""
    if args.log_level:
        set_verbosity(args.log_level)
    for path in execute(args):
        print(f"Wrote {path}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(
        description="Run a rabisense pipeline without installing the package"
    )
    parser.add_argument("command", choices=sorted(EXPERIMENTS))
    parser.add_argument("--output-dir", type=str, default=None)
    parser.add_argument("--log-level", type=str, default=None)
    parser = ExperimentArgs.add_cli_args(parser)
    args = parser.parse_args()
    main(args)
