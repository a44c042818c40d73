"""
sweep command
Runs every (eps, nu) pair, stores the records and writes the reports
"""

import argparse

from commands.options import output_dir
from database.schemas import RunConfig
from services import sweep_engine
from utilities import log
from utils.reporting import emit


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("sweep", parents=parents, help="run the (eps, nu) study and emit reports")
    parser.add_argument("--no-ns", dest="run_ns", action="store_false",
                        help="measure the approximation only, skip the Navier-Stokes runs")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, config: RunConfig) -> int:
    folder = output_dir(args, config)
    results = sweep_engine.sweep(config, run_ns=getattr(args, "run_ns", True))
    stored = sweep_engine.persist_results(results, config.name, folder)
    log.debug(f"stored {stored} sweep records for study '{config.name}'")
    written = emit(results, config.report.formats, folder, stem=config.name,
                   include_runtimes=config.report.include_runtimes)

    failed = [r for r in results if r.status != "ok"]
    for r in results:
        log.status(f"eps={r.epsilon:g} nu={r.nu:.3g} {r.status} ({r.resolution})", r.status == "ok")
    log.status(f"sweep '{config.name}': {len(results) - len(failed)}/{len(results)} pairs ok, "
               f"reports {', '.join(str(p) for p in written.values())}", not failed)
    return 1 if failed else 0
