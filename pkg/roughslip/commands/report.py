"""
report command
Re-emits stored sweep records (run database or a JSON report) in the requested formats
"""

import argparse

from commands.options import output_dir
from database.schemas import RunConfig
from services.sweep_engine import load_results
from utilities import log
from utils.reporting import emit, read_json


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("report", parents=parents, help="emit CSV/JSON/SVG from stored sweep records")
    parser.add_argument("--from-json", dest="from_json", help="read records from a JSON report instead of the database")
    parser.add_argument("--stem", help="file name stem of the reports (default: the study name)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, config: RunConfig) -> int:
    folder = output_dir(args, config)
    source = getattr(args, "from_json", None)
    results = read_json(source) if source else load_results(config.name, folder)
    if not results:
        log.debug(f"no stored records for study '{config.name}'")
    written = emit(results, config.report.formats, folder, stem=getattr(args, "stem", None) or config.name,
                   include_runtimes=config.report.include_runtimes)
    log.status(f"{len(results)} records -> {', '.join(str(p) for p in written.values())}")
    return 0
