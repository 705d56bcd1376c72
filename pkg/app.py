"""
SBC Concentration - Command-line entry point

Usage:
    python app.py run --config configs/minimal.conf
    python app.py audit --config configs/reference_two_agent.conf --n 100000
    python app.py reproduce fig2b --out results/fig2b
"""
import argparse
import sys
from typing import Callable, Dict, List, Optional

from dotenv import load_dotenv

from src import __version__
from src.exact_oracle import MassDriftError, NonLatticeNoiseError, ResourceLimitError
from src.experiment_config import ConfigError, ExperimentConfig, load_config
from src.figures import FIGURE_NAMES, UnknownFigureError, reproduce_figure
from src.runner import ExperimentRunner, RunResult, summary_lines
from src.utils.logger import setup_logger

# Load environment variables
load_dotenv()

# Library modules log under the "src" hierarchy
setup_logger("src")
logger = setup_logger("app")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3

COMMANDS: Dict[str, Callable[[ExperimentRunner], RunResult]] = {
    "run": ExperimentRunner.run,
    "simulate": ExperimentRunner.simulate,
    "tail": ExperimentRunner.tail,
    "bound": ExperimentRunner.bounds,
    "audit": ExperimentRunner.audit,
    "oracle": ExperimentRunner.oracle,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment config file (flat dotted key = value)")
    common.add_argument("--seed", type=int, help="Master seed override")
    common.add_argument("--n", type=int, help="Trajectory count override")
    common.add_argument("--out", help="Output directory override")
    common.add_argument("--format", choices=["csv", "json"], help="Table format override")

    parser = argparse.ArgumentParser(
        prog="sbc-verify",
        description="Simulate stochastic bounded confidence dynamics and check concentration bounds",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="Tails, moments and bounds at the configured times")
    sub.add_parser("simulate", parents=[common], help="One seeded path per process")
    sub.add_parser("tail", parents=[common], help="Empirical tails against bounds")
    sub.add_parser("bound", parents=[common], help="Evaluate bounds without simulating")
    sub.add_parser("audit", parents=[common], help="Check each link of the Chernoff argument")
    sub.add_parser("oracle", parents=[common], help="Exact law for lattice noise")
    reproduce = sub.add_parser("reproduce", parents=[common], help="Data for a reference figure")
    reproduce.add_argument("figure", help=f"One of {', '.join(FIGURE_NAMES)}")
    reproduce.add_argument("--horizon", type=int, help="Largest t")
    reproduce.add_argument("--svg", action=argparse.BooleanOptionalAction, default=None, help="Render SVG plots")
    return parser


def _load(args: argparse.Namespace, parser: argparse.ArgumentParser) -> ExperimentConfig:
    if not args.config:
        parser.error(f"{args.command} requires --config")
    config = load_config(args.config)
    return config.with_overrides(seed=args.seed, n=args.n, out=args.out, fmt=args.format)


def execute(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.command == "reproduce":
        files = reproduce_figure(
            args.figure,
            out_dir=args.out,
            n=args.n,
            seed=args.seed if args.seed is not None else 0,
            horizon=args.horizon,
            svg=args.svg,
        )
        for path in files:
            print(path)
        return EXIT_OK

    config = _load(args, parser)
    result = COMMANDS[args.command](ExperimentRunner(config))
    for line in summary_lines(result):
        print(line)
    for path in result.files:
        logger.info(f"Wrote {path}")
    return EXIT_OK


def run_cli(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and dispatch

    Returns:
        int: 0 on success, 2 on configuration or usage errors, 3 on resource errors
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return execute(args, parser)
    except ConfigError as e:
        for line in e.format_lines():
            print(line, file=sys.stderr)
        return EXIT_USAGE
    except (UnknownFigureError, NonLatticeNoiseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except MassDriftError as e:
        print(f"oracle: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
