"""
check command
Runs the property suites; the exit code is 0 only when every check passed
"""

import argparse
import json
from pathlib import Path

from commands.options import output_dir
from database.schemas import RunConfig
from services.check_suites import SUITES, persist_checks, run_suites
from utilities import log


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("check", parents=parents, help="run property suites")
    parser.add_argument("--suite", dest="suites", action="append", choices=list(SUITES) + ["all"],
                        help="suite to run, repeatable (default: every fast suite)")
    parser.add_argument("--slow", action="store_true", help="include the slow suites when none are named")
    parser.add_argument("--no-store", dest="store", action="store_false",
                        help="do not record results in the run database")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, config: RunConfig) -> int:
    results = run_suites(config, getattr(args, "suites", None), getattr(args, "slow", False))
    total = failed = 0
    for suite, checks in results.items():
        for check in checks:
            total += 1
            failed += not check.passed
            note = " (degenerate)" if check.degenerate else ""
            log.status(f"{check.name}: {check.value:.3e} vs {check.bound:.3e}{note}", check.passed)

    folder = output_dir(args, config)
    if getattr(args, "store", True):
        persist_checks(results, folder)
        report = Path(folder) / f"{config.name}_checks.json"
        payload = {suite: [c.model_dump() for c in checks] for suite, checks in results.items()}
        report.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
        log.debug(f"check report written to {report}")

    log.status(f"{total - failed}/{total} checks passed", failed == 0)
    return 0 if failed == 0 else 1
