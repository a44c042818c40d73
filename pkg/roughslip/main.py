#!/usr/bin/env python3
# Rough-wall Navier slip study - command-line entry point
import argparse
import sys
from typing import List, Optional

from commands import build_approx, check, report, run_ns, sweep
from commands.options import config_parent, overrides_from_args, parse_config
from utilities import log
from utilities.errors import ConfigError

COMMANDS = (build_approx, run_ns, sweep, check, report)


def common_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="YAML study configuration")
    parent.add_argument("--output-dir", dest="output_dir", help="where reports, fields and runs.db go")
    parent.add_argument("-v", "--verbose", action="store_true", help="print [DEBUG] lines")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughslip",
        description="Boundary-layer approximation and Navier-Stokes runs over a rough wall with Navier slip",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [common_parent(), config_parent()]
    for command in COMMANDS:
        command.register(subparsers, parents)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    log.set_verbose(args.verbose)
    try:
        config = parse_config(args.config, overrides_from_args(args))
        log.debug(f"study '{config.name}': eps {config.sweep.epsilons}, N0={config.n0}, N={config.order}")
        return args.handler(args, config)
    except ConfigError as e:
        log.error(str(e))
        return 2
    except Exception as e:
        log.error(f"{args.command} failed: {str(e)}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
