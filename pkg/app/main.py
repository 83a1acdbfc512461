"""Command-line entry point."""

import argparse
import json
import sys
import time
from collections.abc import Sequence

from app.commands import evaluate, graphs, normalize, qa
from app.pipeline import RunConfig
from core.config import TOOL_NAME, TOOL_VERSION
from core.errors import ScaffoldError
from core.logging import CommandLogger, cli_logger, configure_logging, set_run_id


def build_parser() -> argparse.ArgumentParser:
    """Create the ``scaffold`` argument parser with every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="Output file (directory for evaluate); stdout when omitted")
    common.add_argument("--jobs", type=int, help="Worker processes, one scene per task")
    common.add_argument("--seed", type=int, help="Seed for every sampling step")

    parser = argparse.ArgumentParser(
        prog="scaffold",
        description="LocalCogMap scene graphs, 7-DoF grounding data and evaluation for 3D scenes.",
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True, metavar="COMMAND")
    graphs.register(subparsers, common)
    qa.register(subparsers, common)
    normalize.register(subparsers, common)
    evaluate.register(subparsers, common)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand and return its exit code (0 ok, 1 validation, 2 usage, 3 I/O)."""
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    run_id = set_run_id()
    start_time = time.perf_counter()
    CommandLogger.log_command_start(args.command, run_id=run_id)
    try:
        config = RunConfig.from_args(args)
        exit_code: int = args.handler(config)
    except ScaffoldError as exc:
        exit_code = exc.exit_code
        cli_logger.error("Command failed", command=args.command, **exc.to_dict())
        print(f"error: {exc.message}", file=sys.stderr)
        if exc.detail:
            print(f"detail: {json.dumps(exc.detail, sort_keys=True, default=str)}", file=sys.stderr)

    CommandLogger.log_command_complete(
        args.command,
        exit_code=exit_code,
        duration_ms=(time.perf_counter() - start_time) * 1000,
    )
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
