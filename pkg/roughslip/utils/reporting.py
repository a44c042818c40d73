#!/usr/bin/env python3
"""
Report emission for sweep results: CSV, JSON and log-log SVG plots
"""

import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import matplotlib
matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "roughslip"
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from database.schemas import SweepResult
from utilities.errors import StorageError
from utilities import log

CSV_COLUMNS = [
    "epsilon", "nu", "alpha", "N", "grid_x1", "grid_x2", "T0",
    "q_l2_scaled", "q_linf", "q_curl_scaled", "limit_l2", "limit_linf",
    "resid_curl_linf", "resid_curl_l2", "layer_linf", "layer_l2", "interior_linf",
    "wall_slip_linf", "wall_bc_defect", "energy_drift", "weight_m",
    "regime", "resolution", "runtime_s", "status", "error",
]
PLOTTED = ["q_linf", "q_l2_scaled", "limit_linf", "resid_curl_l2", "layer_linf", "layer_l2", "interior_linf"]
FORMATS = ("csv", "json", "svg")


def results_frame(results: Sequence[SweepResult], include_runtimes: bool = False) -> pd.DataFrame:
    frame = pd.DataFrame([r.model_dump() for r in results], columns=CSV_COLUMNS)
    if not include_runtimes:
        # wall-clock times are the only nondeterministic column
        frame["runtime_s"] = None
    return frame


def write_csv(results: Sequence[SweepResult], path, include_runtimes: bool = False) -> Path:
    path = Path(path)
    frame = results_frame(results, include_runtimes)
    frame.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    return path


def write_json(results: Sequence[SweepResult], path, include_runtimes: bool = False) -> Path:
    path = Path(path)
    records = []
    for r in results:
        record = r.model_dump()
        if not include_runtimes:
            record["runtime_s"] = None
        records.append(record)
    path.write_text(json.dumps(records, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path) -> List[SweepResult]:
    try:
        records = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise StorageError(f"Reading results failed: {str(e)}")
    return [SweepResult(**record) for record in records]


def write_svg(results: Sequence[SweepResult], path, columns: Iterable[str] = PLOTTED) -> Optional[Path]:
    """Log-log plot of the positive measurements against eps"""
    path = Path(path)
    frame = results_frame([r for r in results if r.status == "ok"])
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    plotted = 0
    for column in columns:
        data = frame[["epsilon", column]].dropna()
        data = data[data[column] > 0]
        if len(data) < 2:
            continue
        ax.loglog(data["epsilon"], data[column], marker="o", label=column)
        plotted += 1
    ax.set_xlabel("epsilon")
    ax.set_ylabel("measured value")
    ax.grid(True, which="both", alpha=0.3)
    if plotted:
        ax.legend(fontsize="small")
    # fixed metadata keeps reruns byte-identical
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def emit(results: Sequence[SweepResult], formats: Sequence[str], output_dir, stem: str = "sweep",
         include_runtimes: bool = False) -> Dict[str, Path]:
    unknown = [f for f in formats if f not in FORMATS]
    if unknown:
        raise ValueError(f"unknown report formats {unknown}, expected any of {FORMATS}")
    folder = Path(output_dir)
    folder.mkdir(parents=True, exist_ok=True)
    written = {}
    if "csv" in formats:
        written["csv"] = write_csv(results, folder / f"{stem}.csv", include_runtimes)
    if "json" in formats:
        written["json"] = write_json(results, folder / f"{stem}.json", include_runtimes)
    if "svg" in formats:
        written["svg"] = write_svg(results, folder / f"{stem}.svg")
    for kind, path in written.items():
        log.debug(f"wrote {kind} report {path}")
    return written
