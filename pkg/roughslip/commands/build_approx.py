"""
build-approx command
Solves the boundary-layer cascade for one eps and stores u^app's pieces
"""

import argparse
from pathlib import Path

import numpy as np

from commands.options import epsilon_index, output_dir
from database.schemas import RunConfig
from services import sweep_engine
from services.expansion import ApproximationBundle, measure_amplitudes, solve_cascade
from utilities import log
from utils.field_storage import write_field


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("build-approx", parents=parents,
                                   help="solve the cascade and store the approximation for one eps")
    parser.add_argument("--epsilon", type=float, help="one of the sweep values (default: the first)")
    parser.add_argument("--no-fields", dest="save_fields", action="store_false",
                        help="report amplitudes only, do not write field files")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, config: RunConfig) -> int:
    eps = config.sweep.epsilons[epsilon_index(config, getattr(args, "epsilon", None))]
    domain = sweep_engine.domain_for(config, eps)
    base = sweep_engine.base_flow(config)
    cascade = solve_cascade(domain, base, config.order, sweep_engine.cell_grid_from_config(config))
    bundle = ApproximationBundle(config.order, cascade)
    measurement = measure_amplitudes(bundle, sweep_engine.forcing_from_config(config),
                                     sweep_engine.diagnostics_grid(config, domain))
    log.progress({"epsilon": eps, "order": config.order, **measurement.values})

    if getattr(args, "save_fields", True):
        folder = Path(output_dir(args, config)) / f"{config.name}_approx_eps{int(round(1 / eps))}"
        channel = {"kind": "channel", "nx1": base.grid.nx1, "nx2": base.grid.nx2, "height": base.grid.height}
        cell = {"kind": "cell", "n_z1": cascade.disc.M, "n_z2": cascade.disc.Ns,
                "z_max": cascade.disc.grid.z_max, "amplitude": cascade.disc.amplitude}
        indices = cascade.snapshot_indices
        write_field(folder / "u0.bin", "u0", np.stack([base.u1[indices], base.u2[indices]]),
                    float(cascade.snapshot_times[-1]), channel)
        for k in range(1, config.order + 1):
            corrector = cascade.correctors[k]
            write_field(folder / f"u{k}.bin", f"u{k}", np.stack([corrector.u1[indices], corrector.u2[indices]]),
                        float(cascade.snapshot_times[-1]), channel)
            write_field(folder / f"v{k}_bl.bin", f"v{k}_bl", cascade.layers[k].velocity,
                        float(cascade.snapshot_times[-1]), cell)
        log.debug(f"approximation fields written to {folder}")

    log.status(f"u^app built for eps={eps:g}, order {config.order}")
    return 0
