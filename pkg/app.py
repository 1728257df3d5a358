# app.py - Command-line entry point for the federated parameter optimization simulator
import argparse
import logging
import sys
from typing import List, Optional

import config
from baselines.strategies import STRATEGY_NAMES
from cli.commands import EXIT_CONFIG, cmd_compare, cmd_examples, cmd_run, cmd_sweep
from cli.dependencies import read_document


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedgpo",
        description="Simulate federated learning on a heterogeneous fleet with adaptive (B, E, K) selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_strategy: bool = False) -> None:
        p.add_argument("--config", required=True, help="JSON config document")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default=None, help="output directory (default: output.directory)")
        p.add_argument("--max-rounds", type=int, default=None, help="round limit override")
        if with_strategy:
            p.add_argument("--strategy", choices=STRATEGY_NAMES, default=None, help="strategy override")

    common(sub.add_parser("run", help="run one experiment and write its report"), with_strategy=True)
    common(sub.add_parser("sweep", help="grid search the lattice for the Fixed (Best) tuple"))
    common(sub.add_parser("compare", help="run several strategies and write the comparison table"))
    examples = sub.add_parser("examples", help="write the built-in example configs")
    examples.add_argument("--out", default=None, help="output directory")
    return parser


def _log_level(path: str) -> str:
    try:
        return str(read_document(path).get("output", {}).get("log_level", config.LOG_LEVEL))
    except Exception:
        return config.LOG_LEVEL


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config.setup_logging(_log_level(args.config) if hasattr(args, "config") else config.LOG_LEVEL)
    if getattr(args, "seed", None) is not None and args.seed < 0:
        logging.error("--seed must be non-negative")
        return EXIT_CONFIG

    if args.command == "run":
        return cmd_run(args.config, args.seed, args.out, args.strategy, args.max_rounds)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.seed, args.out, args.max_rounds)
    if args.command == "compare":
        return cmd_compare(args.config, args.seed, args.out, args.max_rounds)
    return cmd_examples(args.out)


if __name__ == "__main__":
    sys.exit(main())
