"""
Sweep Engine
Builds study objects from a RunConfig and runs (epsilon, nu) pairs in parallel
"""

import time
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence

import numpy as np

from database.schemas import RunConfig, SweepResult
from services.cell_solver import CellGrid
from services.diagnostics import gradient_bound_m
from services.euler_cascade import EulerGrid, EulerSeries, ForcingMode, ForcingSpec, solve_euler_base
from services.expansion import ApproximationBundle, measure_amplitudes, solve_cascade
from services.geometry import DomainParams, FourierSeries, RoughProfile
from services.grids import WallGrid
from services.ns_solver import NSConfig, NSRun, run as run_ns
from utilities import log


# --- BUILDERS ---

def profile_from_config(config: RunConfig) -> RoughProfile:
    return RoughProfile.from_triples(((m.j, m.re, m.im) for m in config.profile.modes), config.profile.mean)


def friction_from_config(config: RunConfig) -> Optional[FourierSeries]:
    friction = config.friction
    if friction.mean == 0.0 and not friction.modes:
        return None
    return FourierSeries.from_triples(((m.j, m.re, m.im) for m in friction.modes), friction.mean)


def forcing_from_config(config: RunConfig) -> ForcingSpec:
    modes = tuple(ForcingMode(**mode.model_dump()) for mode in config.forcing.modes)
    return ForcingSpec(modes=modes, switch_off=config.forcing.switch_off)


def domain_for(config: RunConfig, epsilon: float) -> DomainParams:
    return DomainParams(epsilon=epsilon, n0=config.n0, profile=profile_from_config(config))


def euler_grid_from_config(config: RunConfig) -> EulerGrid:
    return EulerGrid(**config.euler.model_dump())


def cell_grid_from_config(config: RunConfig) -> CellGrid:
    return CellGrid(**config.cell.model_dump())


def diagnostics_grid(config: RunConfig, domain: DomainParams) -> WallGrid:
    """Spectral grid resolving the layer of thickness eps"""
    eps = domain.epsilon
    options = config.diagnostics
    nx = max(options.min_x1_points, int(np.ceil(options.x1_points_per_wavelength / eps)))
    return WallGrid.spectral(domain.wall("physical"), nx + nx % 2, config.euler.height, eps,
                             options.nodes_per_panel)


def ns_config_for(config: RunConfig, domain: DomainParams, nu: float, forcing=None,
                  checkpoint_dir: Optional[str] = None) -> NSConfig:
    numerics = config.ns
    return NSConfig(
        nu=nu,
        forcing=forcing or forcing_from_config(config),
        horizon=config.horizon,
        domain=domain,
        friction=friction_from_config(config),
        height=numerics.height,
        ns=numerics.ns,
        layer_fraction=numerics.layer_fraction,
        min_x1_points=numerics.min_x1_points,
        points_per_wavelength=numerics.points_per_wavelength,
        dt=numerics.dt,
        cfl=numerics.cfl,
        sponge_strength=numerics.sponge_strength,
        wall_tol=numerics.wall_tol,
        wall_max_iterations=numerics.wall_max_iterations,
        progress_every=numerics.progress_every,
        checkpoint_every=numerics.checkpoint_every,
        checkpoint_dir=checkpoint_dir,
        nu_window_constant=config.sweep.nu_window_constant,
        friction_window_constant=config.friction.window_constant,
    )


def base_flow(config: RunConfig) -> EulerSeries:
    """u0 does not depend on eps, so one solve serves the whole sweep"""
    return solve_euler_base(forcing_from_config(config), euler_grid_from_config(config), config.horizon)


# --- PAIRS ---

@dataclass
class PairTask:
    position: int
    config: RunConfig
    epsilon: float
    nu: float
    base: EulerSeries
    run_ns: bool = True


def compare_with_approximation(bundle: ApproximationBundle, ns_run: NSRun, epsilon: float) -> Dict[str, float]:
    """
    sup_t of eps^{-1/2} |u - u^app|_2, |u - u^app|_inf and eps |curl(u - u^app)|_inf on snapshots,
    and sup_t of |u - u0|_2 and |u - u0|_inf against the flat-wall Euler flow alone
    """
    grid = ns_run.grid
    out = {"q_l2_scaled": 0.0, "q_linf": 0.0, "q_curl_scaled": 0.0, "limit_l2": 0.0, "limit_linf": 0.0}

    def l2(v: np.ndarray) -> float:
        return float(np.sqrt(max(grid.integrate(v[0] ** 2 + v[1] ** 2), 0.0)))

    for t, state in sorted(ns_run.snapshots.items()):
        diff = state.u - bundle.velocity(t, grid.x1, grid.X2)
        vorticity_gap = state.omega - bundle.vorticity.evaluate(t, grid.x1, grid.X2)
        out["q_l2_scaled"] = max(out["q_l2_scaled"], l2(diff) / np.sqrt(epsilon))
        out["q_linf"] = max(out["q_linf"], float(np.max(np.hypot(diff[0], diff[1]))))
        out["q_curl_scaled"] = max(out["q_curl_scaled"], float(epsilon * np.max(np.abs(vorticity_gap))))
        gap = state.u - bundle.base_velocity(t, grid.x1, grid.X2)
        out["limit_l2"] = max(out["limit_l2"], l2(gap))
        out["limit_linf"] = max(out["limit_linf"], float(np.max(np.hypot(gap[0], gap[1]))))
    return out


def run_pair(task: PairTask) -> SweepResult:
    config, eps, nu = task.config, task.epsilon, task.nu
    start = time.perf_counter()
    record = {"epsilon": eps, "nu": nu, "alpha": 1.0 / config.n0, "N": config.order, "T0": config.horizon}
    try:
        domain = domain_for(config, eps)
        forcing = forcing_from_config(config)
        cascade = solve_cascade(domain, task.base, config.order, cell_grid_from_config(config))
        bundle = ApproximationBundle(config.order, cascade)
        measurement = measure_amplitudes(bundle, forcing, diagnostics_grid(config, domain))
        record.update({
            "resid_curl_linf": measurement.values["residual_curl_linf"],
            "resid_curl_l2": measurement.values["residual_curl_l2"],
            "layer_linf": measurement.values["layer_linf"],
            "layer_l2": measurement.values["layer_l2"],
            "interior_linf": measurement.values["interior_linf"],
        })
        if task.run_ns:
            ns_run = run_ns(ns_config_for(config, domain, nu, forcing), snapshot_times=bundle.snapshot_times[1:])
            record.update(compare_with_approximation(bundle, ns_run, eps))
            record.update({
                "grid_x1": ns_run.grid.nx,
                "grid_x2": ns_run.grid.ns,
                "wall_slip_linf": float(ns_run.series["wall_slip_linf"].max()),
                "wall_bc_defect": float(ns_run.series["wall_bc_defect"].max()),
                "energy_drift": ns_run.energy_drift,
                "weight_m": gradient_bound_m([s.u for s in ns_run.snapshots.values()], ns_run.grid, eps),
                "regime": "theorem" if ns_run.regime.get("theorem") else "outside",
                "resolution": ns_run.resolution,
            })
        record["runtime_s"] = time.perf_counter() - start
        return SweepResult(**record)
    except Exception as e:
        log.error(f"pair eps={eps:g} nu={nu:.3g} failed: {str(e)}")
        record["runtime_s"] = time.perf_counter() - start
        return SweepResult(**record, status="failed", error=f"pair failed: {str(e)}")


def sweep_tasks(config: RunConfig, base: EulerSeries, run_ns: bool = True) -> List[PairTask]:
    return [PairTask(position=i, config=config, epsilon=eps, nu=config.sweep.viscosity(i), base=base, run_ns=run_ns)
            for i, eps in enumerate(config.sweep.epsilons)]


def sweep(config: RunConfig, base: Optional[EulerSeries] = None, run_ns: bool = True,
          workers: Optional[int] = None) -> List[SweepResult]:
    """Independent pairs in a process pool; results come back in sweep order"""
    base = base if base is not None else base_flow(config)
    tasks = sweep_tasks(config, base, run_ns)
    workers = workers or config.sweep.workers
    log.debug(f"sweep '{config.name}': {len(tasks)} pairs on {workers} worker(s)")
    if workers <= 1 or len(tasks) <= 1:
        return [run_pair(task) for task in tasks]
    with Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(run_pair, tasks)


# --- PERSISTENCE ---

def persist_results(results: Sequence[SweepResult], study: str, output_dir: Optional[str] = None) -> int:
    from database.connection import get_db
    from database.models import SweepRecord

    db = next(get_db(output_dir))
    try:
        db.query(SweepRecord).filter(SweepRecord.study == study).delete()
        for position, result in enumerate(results):
            db.add(SweepRecord(study=study, position=position, **result.model_dump()))
        db.commit()
        return len(results)
    except Exception as e:
        db.rollback()
        raise Exception(f"Saving sweep results failed: {str(e)}")
    finally:
        db.close()


def load_results(study: str, output_dir: Optional[str] = None) -> List[SweepResult]:
    from database.connection import get_db
    from database.models import SweepRecord

    db = next(get_db(output_dir))
    try:
        rows = (db.query(SweepRecord).filter(SweepRecord.study == study)
                .order_by(SweepRecord.position).all())
        fields = SweepResult.model_fields.keys()
        return [SweepResult(**{name: getattr(row, name) for name in fields}) for row in rows]
    finally:
        db.close()
