"""Main entry point for the marriage-market stability toolkit"""

import sys
import argparse
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

from src.cli.commands import cmd_check, cmd_gen, cmd_identify, cmd_index, cmd_simulate
from src.utils.logger import set_log_level, setup_logger

REGIME_HELP = "unilateral, transfers or no-transfers"


def _add_program_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-path-len", type=int, default=None,
                        help="Edge cap for no-transfers structures (0 = unbounded)")
    parser.add_argument("--eps", type=float, default=None, help="Strictness tolerance")
    parser.add_argument("--time-limit", type=float, default=None, help="Solver time limit in seconds")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation"""
    parser = argparse.ArgumentParser(description="Revealed-preference stability of marriage markets")
    parser.add_argument("--config-dir", default="config", help="Directory with solver.yaml and simulation.yaml")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="Is the market rationalizable as stable?")
    check.add_argument("path", help="Market JSON file")
    check.add_argument("--regime", default="transfers", help=REGIME_HELP)
    check.add_argument("--json", action="store_true", help="Machine-readable output")
    _add_program_flags(check)
    check.set_defaults(handler=cmd_check)

    index = commands.add_parser("index", help="Stability indices per outside option")
    index.add_argument("path", help="Market JSON file")
    index.add_argument("--regime", default="transfers", help=REGIME_HELP)
    index.add_argument("--json", action="store_true", help="JSON instead of CSV")
    index.add_argument("--out", default=None, help="Write the table to a file")
    _add_program_flags(index)
    index.set_defaults(handler=cmd_index)

    identify = commands.add_parser("identify", help="Bounds on the sharing rule")
    identify.add_argument("path", help="Market JSON file")
    identify.add_argument("--regime", default="transfers", help=f"Comma-separated: {REGIME_HELP}")
    identify.add_argument("--pinning", choices=["aggregate", "per-option"], default="aggregate",
                          help="Hold the sum of indices or each index at its optimum")
    identify.add_argument("--json", action="store_true", help="JSON instead of CSV")
    identify.add_argument("--out", default=None, help="Write the table to a file")
    _add_program_flags(identify)
    identify.set_defaults(handler=cmd_identify)

    simulate = commands.add_parser("simulate", help="Perturbation experiments on synthetic markets")
    simulate.add_argument("--scenario", default=None, help="Comma-separated: prices, income, both")
    simulate.add_argument("--alpha-grid", default=None, help="Comma-separated perturbation strengths")
    simulate.add_argument("--draws", type=int, default=None, help="Markets per cell")
    simulate.add_argument("--couples", type=int, default=None, help="Couples per market")
    simulate.add_argument("--seed", type=int, default=None, help="Base seed")
    simulate.add_argument("--regimes", default=None, help=f"Comma-separated: {REGIME_HELP}")
    simulate.add_argument("--workers", type=int, default=None, help="Parallel processes")
    simulate.add_argument("--no-bounds", action="store_true", help="Skip sharing-rule bounds")
    simulate.add_argument("--out", default="results", help="Output directory")
    _add_program_flags(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    gen = commands.add_parser("gen", help="Write a synthetic market file")
    gen.add_argument("--couples", type=int, default=10, help="Number of couples")
    gen.add_argument("--seed", type=int, default=42, help="Seed")
    gen.add_argument("--committed-share", type=float, default=None, help="Share of committed couples")
    gen.add_argument("--out", default=None, help="Output path (stdout when omitted)")
    gen.set_defaults(handler=cmd_gen)

    return parser


def main(argv=None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_log_level(args.log_level)

    logger = setup_logger("main")
    logger.debug(f"Running {args.command}")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
