#!/usr/bin/env python3

# Standard library imports
import argparse
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))

# Third-party imports
from dotenv import load_dotenv

# before the loggers below read APP_LOG_LEVEL
load_dotenv()

# Local/application imports
from harness.commands import (
    EXIT_USAGE,
    cmd_check_stability,
    cmd_converge,
    cmd_solve,
)
from harness.run_config import ConfigError, RunConfig, parse_config
from log.logger import get_logger as logger
from numerics.errors import ValidationError

logger = logger("burgers_split")

COMMANDS = {
    "solve": cmd_solve,
    "converge": cmd_converge,
    "check-stability": cmd_check_stability,
}

# every flag is an override line appended to the config
OVERRIDES = (
    "R",
    "T",
    "M",
    "N",
    "h",
    "h_min",
    "coupling",
    "out",
    "format",
    "snapshot_t",
    "substeps",
    "workers",
)


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser: one subcommand per command, all sharing
    `--config` and the override flags.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path of a `key = value` run configuration")
    common.add_argument("--R", help="Reynolds number")
    common.add_argument("--T", help="final time")
    common.add_argument("--M", help="cells per axis")
    common.add_argument("--N", help="number of time steps")
    common.add_argument("--h", help="mesh spacing, e.g. 2^-4")
    common.add_argument("--h-min", dest="h_min", help="finest spacing of a ladder")
    common.add_argument(
        "--coupling",
        help="k_eq_R_half_h2, k_eq_quarter_h or k_eq_h",
    )
    common.add_argument("--out", help="snapshot directory or table path")
    common.add_argument("--format", help="table format, csv or json")
    common.add_argument(
        "--snapshot-t", dest="snapshot_t", help="comma separated snapshot times"
    )
    common.add_argument("--substeps", help="substeps per time step, or 'auto'")
    common.add_argument("--workers", help="threads for ladder rows")

    parser = argparse.ArgumentParser(
        description="Time-split MacCormack solver for the 2D coupled Burgers equations"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="integrate one run and write snapshots")
    sub.add_parser("converge", parents=[common], help="run a refinement ladder")
    sub.add_parser(
        "check-stability", parents=[common], help="evaluate the time-step restriction"
    )
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """
    Read the config file named by --config and apply flag overrides on top of it.

    Raises:
        ConfigError: On a malformed or inconsistent configuration.
        OSError: If the config file cannot be read.
    """
    text = ""
    if args.config:
        path = Path(args.config)
        logger.debug(f"Loading config from {path}")
        text = path.read_text()

    overrides: Dict[str, str] = {"command": args.command}
    for key in OVERRIDES:
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return parse_config(text, overrides)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        The command's exit status; 2 on configuration or I/O errors.
    """
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, ValidationError) as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"I/O error on {e.filename}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
