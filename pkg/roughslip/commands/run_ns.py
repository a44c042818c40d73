"""
run-ns command
One Navier-Stokes run on the rough domain with its diagnostics series
"""

import argparse
from pathlib import Path

import numpy as np

from commands.options import epsilon_index, output_dir
from database.schemas import RunConfig
from services import sweep_engine
from services.ns_solver import run as run_ns
from utilities import log
from utils.field_storage import write_field


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("run-ns", parents=parents, help="run the Navier-Stokes solver for one (eps, nu)")
    parser.add_argument("--epsilon", type=float, help="one of the sweep values (default: the first)")
    parser.add_argument("--nu", type=float, help="viscosity (default: the sweep rule for this eps)")
    parser.add_argument("--snapshots", type=int, default=4, help="evenly spaced snapshots stored on (0, T0]")
    parser.add_argument("--checkpoint-every", dest="checkpoint_every", type=int,
                        help="write omega and psi every this many steps")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, config: RunConfig) -> int:
    index = epsilon_index(config, getattr(args, "epsilon", None))
    eps = config.sweep.epsilons[index]
    nu = args.nu if getattr(args, "nu", None) is not None else config.sweep.viscosity(index)
    folder = Path(output_dir(args, config)) / f"{config.name}_ns_eps{int(round(1 / eps))}"

    ns_config = sweep_engine.ns_config_for(config, sweep_engine.domain_for(config, eps), nu,
                                           checkpoint_dir=str(folder / "checkpoints"))
    if getattr(args, "checkpoint_every", None) is not None:
        ns_config.checkpoint_every = args.checkpoint_every
    count = max(int(getattr(args, "snapshots", 4)), 0)
    times = np.linspace(0.0, config.horizon, count + 1)[1:]
    result = run_ns(ns_config, snapshot_times=times)

    folder.mkdir(parents=True, exist_ok=True)
    result.series.to_csv(folder / "series.csv", index=False, float_format="%.12g", lineterminator="\n")
    grid = result.grid.describe()
    for t, state in sorted(result.snapshots.items()):
        write_field(folder / f"u_t{t:.6f}.bin", "u", state.u, t, grid)
        write_field(folder / f"omega_t{t:.6f}.bin", "omega", state.omega, t, grid)

    regime = "theorem" if result.regime.get("theorem") else "outside"
    log.progress({"epsilon": eps, "nu": nu, "regime": regime, "resolution": result.resolution,
                  "energy_drift": result.energy_drift, "steps": int(len(result.series) - 1)})
    log.status(f"NS run eps={eps:g} nu={nu:.3g} reached t={result.final.t:.6g} ({result.resolution}, {regime})")
    return 0
