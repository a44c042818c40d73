"""
Navier-Stokes Solver
Vorticity-streamfunction Navier-Stokes on the rough strip with the Navier friction condition
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from services.geometry import DomainParams, FourierSeries, RoughWall
from services.grids import WallGrid
from utilities.errors import CFLViolationError, ContractError, SolverConvergenceError
from utilities import log
from utils.field_storage import write_field

CFL_MAX = 1.0
MIN_LAYER_CELLS = 6
POINTS_PER_WAVELENGTH = 8


@dataclass
class NSConfig:
    """
    Physical setup and numerics of one Navier-Stokes run. The wall comes from
    the domain (x2 = eps^{1+alpha} eta(x1/eps)) unless an explicit wall is given.
    """
    nu: float
    forcing: object
    horizon: float
    domain: Optional[DomainParams] = None
    wall: Optional[RoughWall] = None
    friction: Optional[FourierSeries] = None
    height: float = 8.0
    nx: Optional[int] = None
    ns: int = 96
    layer_thickness: Optional[float] = None
    layer_fraction: float = 1.0 / 3.0
    min_x1_points: int = 64
    points_per_wavelength: int = POINTS_PER_WAVELENGTH
    dt: Optional[float] = None
    cfl: float = 0.4
    sponge_strength: float = 5.0
    wall_tol: float = 1e-9
    wall_max_iterations: int = 50
    progress_every: int = 0
    checkpoint_every: int = 0
    checkpoint_dir: Optional[str] = None
    nu_window_constant: float = 1e3
    friction_window_constant: float = 1.0

    def __post_init__(self):
        if self.nu <= 0.0:
            raise ValueError(f"viscosity must be positive, got {self.nu}")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if self.domain is None and self.wall is None:
            raise ContractError("NSConfig needs a domain or an explicit wall")

    @property
    def rough_wall(self) -> RoughWall:
        return self.wall if self.wall is not None else self.domain.wall("physical")

    @property
    def epsilon(self) -> float:
        return self.domain.epsilon if self.domain is not None else 1.0

    @property
    def layer(self) -> float:
        """Thickness holding layer_fraction of the s-points: 3 sqrt(nu eps) by default"""
        if self.layer_thickness is not None:
            return self.layer_thickness
        return min(3.0 * np.sqrt(self.nu * self.epsilon), self.height / 3.0)

    @property
    def x1_points(self) -> int:
        if self.nx is not None:
            return self.nx
        n = max(self.min_x1_points, int(np.ceil(self.points_per_wavelength / self.epsilon)))
        return n + n % 2

    @property
    def time_step(self) -> float:
        if self.dt is not None:
            return self.dt
        dt = self.cfl / self.x1_points
        steps = int(np.ceil(self.horizon / dt))
        return self.horizon / steps

    def build_grid(self) -> WallGrid:
        return WallGrid.stretched(self.rough_wall, self.x1_points, self.ns, self.height, self.layer,
                                  self.layer_fraction)


def regime_flags(config: NSConfig) -> Dict[str, bool]:
    """nu <= C eps^7 and |lambda|_{C^2} <= c eps^{-1+alpha}"""
    if config.domain is None:
        return {"nu_window": False, "friction_window": False, "theorem": False}
    eps, alpha = config.domain.epsilon, config.domain.alpha
    nu_ok = config.nu <= config.nu_window_constant * eps ** 7
    lam = config.friction.c2_norm() if config.friction is not None else 0.0
    friction_ok = lam <= config.friction_window_constant * eps ** (-1.0 + alpha)
    return {"nu_window": bool(nu_ok), "friction_window": bool(friction_ok), "theorem": bool(nu_ok and friction_ok)}


def resolution_tag(grid: WallGrid, nu: float, epsilon: float) -> str:
    """'resolved' with >= 6 cells in sqrt(nu eps) and >= 8 points per roughness wavelength"""
    cells = grid.cells_within(np.sqrt(nu * epsilon))
    points = epsilon / grid.spacing_x1()
    if cells >= MIN_LAYER_CELLS and points >= POINTS_PER_WAVELENGTH - 1e-9:
        return "resolved"
    return "extrapolated"


@dataclass
class NSState:
    t: float
    omega: np.ndarray
    psi: np.ndarray
    u: np.ndarray
    wall_slip: np.ndarray
    flux: float
    top_velocity: float
    step: int = 0


def laplacian_matrix(grid: WallGrid) -> sp.csr_matrix:
    """a11 d_xx + a22 d_ss + a12 d_xs + b2 d_s in flattened coordinates; index i * ns + j"""
    a11, a22, a12, b2 = (sp.diags(c.ravel()) for c in grid.metric.laplacian_coefficients)
    Ix, Is = sp.identity(grid.nx, format="csr"), sp.identity(grid.ns, format="csr")
    return (a11 @ sp.kron(grid.Dxx, Is) + a22 @ sp.kron(Ix, grid.Dss)
            + a12 @ sp.kron(grid.Dx, grid.Ds) + b2 @ sp.kron(Ix, grid.Ds)).tocsr()


class NSSolver:
    """Crank-Nicolson diffusion, Heun advection, Dirichlet wall vorticity iterated to tolerance"""

    def __init__(self, config: NSConfig, grid: Optional[WallGrid] = None):
        self.config = config
        self.grid = grid or config.build_grid()
        g = self.grid
        self.dt = config.time_step
        self.lap = laplacian_matrix(g)
        n = g.nx * g.ns
        boundary = np.zeros((g.nx, g.ns), dtype=bool)
        boundary[:, 0] = boundary[:, -1] = True
        self.boundary = boundary
        keep = sp.diags((~boundary).ravel().astype(float))
        fix = sp.diags(boundary.ravel().astype(float))
        identity = sp.identity(n, format="csr")

        L = config.height
        excess = np.clip((g.X2 - L / 2.0) / (L / 2.0), 0.0, None)
        self.sponge = config.sponge_strength * excess ** 2
        half = 0.5 * self.dt
        sigma = sp.diags(self.sponge.ravel())
        self.explicit = (identity + half * config.nu * self.lap - half * sigma).tocsr()
        implicit = identity - half * config.nu * self.lap + half * sigma
        self.vorticity_lu = splu((keep @ implicit + fix).tocsc())
        self.poisson_lu = splu((keep @ (-self.lap) + fix).tocsc())

        unit = np.zeros((g.nx, g.ns))
        unit[:, -1] = 1.0
        self.psi_unit = self.poisson_lu.solve(unit.ravel()).reshape(g.nx, g.ns)
        self.unit_top_velocity = self._top_velocity(self.psi_unit)

        tau = g.wall_frame.tau
        self.tau = tau
        lam = config.friction.evaluate(g.x1)[0] if config.friction is not None else np.zeros(g.nx)
        self.friction = lam
        # inward frame: 2 D(u) n . tau = lambda u . tau, so omega = (2 kappa - lambda) u . tau
        self.wall_coefficient = 2.0 * g.curvature - lam
        self.top_line = np.full(g.nx, L)

    # --- FIELDS ---

    def _top_velocity(self, psi: np.ndarray) -> float:
        return float(np.mean(self.grid.d2(psi)[:, -1]))

    def streamfunction(self, omega: np.ndarray, top_velocity: float) -> Tuple[np.ndarray, float]:
        """-Lap psi = omega, psi = 0 on the wall, psi = Q on top with mean d2 psi = U_top there"""
        rhs = omega.copy()
        rhs[self.boundary] = 0.0
        psi0 = self.poisson_lu.solve(rhs.ravel()).reshape(omega.shape)
        Q = (top_velocity - self._top_velocity(psi0)) / self.unit_top_velocity
        return psi0 + Q * self.psi_unit, float(Q)

    def velocity(self, psi: np.ndarray) -> np.ndarray:
        return np.stack([self.grid.d2(psi), -self.grid.d1(psi)])

    def wall_slip(self, u: np.ndarray) -> np.ndarray:
        return u[0][:, 0] * self.tau[0] + u[1][:, 0] * self.tau[1]

    def wall_target(self, t: float, slip: np.ndarray) -> np.ndarray:
        target = self.wall_coefficient * slip
        hook = getattr(self.config.forcing, "wall_vorticity_source", None)
        if hook is not None:
            target = target + hook(t, self.grid.x1)
        return target

    def advection(self, omega: np.ndarray, psi: np.ndarray) -> np.ndarray:
        g = self.grid
        return g.metric.q * (g.d_s(psi) * g.d_x1_flat(omega) - g.d_x1_flat(psi) * g.d_s(omega))

    def forcing_terms(self, t: float) -> Tuple[np.ndarray, float]:
        g = self.grid
        curl_f = self.config.forcing.curl(t, g.X1, g.X2)
        f1_top, _ = self.config.forcing.force(t, g.x1, self.top_line)
        return curl_f, float(np.mean(f1_top))

    def top_diffusion(self, omega: np.ndarray) -> float:
        return float(np.mean(self.grid.d2(omega)[:, -1]))

    # --- STEPPING ---

    def _implicit_solve(self, rhs: np.ndarray, t_new: float, top_velocity: float,
                        wall_guess: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float, np.ndarray]:
        cfg = self.config
        wall = wall_guess
        change = np.inf
        for iteration in range(1, cfg.wall_max_iterations + 1):
            b = rhs.copy()
            b[:, 0] = wall
            b[:, -1] = 0.0
            omega = self.vorticity_lu.solve(b.ravel()).reshape(rhs.shape)
            psi, Q = self.streamfunction(omega, top_velocity)
            u = self.velocity(psi)
            target = self.wall_target(t_new, self.wall_slip(u))
            change = float(np.max(np.abs(target - wall), initial=0.0))
            if change <= cfg.wall_tol * max(1.0, float(np.max(np.abs(target), initial=0.0))):
                return omega, psi, Q, u
            wall = target
        raise SolverConvergenceError("wall vorticity iteration did not converge", cfg.wall_max_iterations, change)

    def cfl_number(self, u: np.ndarray) -> float:
        g = self.grid
        # contravariant speed in s: u . grad s = p u1 + q u2
        us = g.metric.p * u[0] + g.metric.q * u[1]
        ds = np.gradient(g.s)
        return float(self.dt * np.max(np.abs(u[0]) / g.spacing_x1() + np.abs(us) / ds[None, :]))

    def step(self, state: NSState) -> NSState:
        cfg, dt = self.config, self.dt
        t0, t1 = state.t, state.t + dt
        curl0, f1_0 = self.forcing_terms(t0)
        curl1, f1_1 = self.forcing_terms(t1)
        if not (np.any(state.omega) or state.top_velocity or np.any(curl0) or np.any(curl1) or f1_0 or f1_1
                or np.any(self.wall_target(t1, np.zeros(self.grid.nx)))):
            return replace(state, t=t1, step=state.step + 1)

        base = (self.explicit @ state.omega.ravel()).reshape(state.omega.shape)
        forcing = 0.5 * (curl0 + curl1)
        advect0 = self.advection(state.omega, state.psi)
        diffusion0 = self.top_diffusion(state.omega)

        rhs = base + dt * (forcing - advect0)
        U_pred = state.top_velocity + dt * (0.5 * (f1_0 + f1_1) - cfg.nu * diffusion0)
        omega_p, psi_p, _, _ = self._implicit_solve(rhs, t1, U_pred, state.omega[:, 0])

        advect1 = self.advection(omega_p, psi_p)
        rhs = base + dt * (forcing - 0.5 * (advect0 + advect1))
        U_new = state.top_velocity + dt * (0.5 * (f1_0 + f1_1)
                                           - 0.5 * cfg.nu * (diffusion0 + self.top_diffusion(omega_p)))
        omega, psi, Q, u = self._implicit_solve(rhs, t1, U_new, omega_p[:, 0])

        cfl = self.cfl_number(u)
        if cfl > CFL_MAX:
            raise CFLViolationError(f"step {state.step + 1} at t = {t1:.4f} is unstable", cfl)
        return NSState(t=t1, omega=omega, psi=psi, u=u, wall_slip=self.wall_slip(u), flux=Q,
                       top_velocity=U_new, step=state.step + 1)

    # --- DIAGNOSTICS ---

    def energy(self, state: NSState) -> float:
        return 0.5 * self.grid.integrate(state.u[0] ** 2 + state.u[1] ** 2)

    def power(self, state: NSState) -> Dict[str, float]:
        """
        dE/dt = int f.u - nu int omega^2 + nu int_wall omega u.tau dsigma, the form the
        vorticity scheme conserves (omega = 0 on the top line). The strain form
        -2 nu int |D u|^2 - nu int_wall lambda (u.tau)^2 is kept alongside as a cross-check.
        """
        g, nu = self.grid, self.config.nu
        f1, f2 = self.config.forcing.force(state.t, g.X1, g.X2)
        u1, u2 = state.u
        a, b = g.gradient(u1), g.gradient(u2)
        strain = a[0] ** 2 + b[1] ** 2 + 0.5 * (a[1] + b[0]) ** 2
        return {
            "work": g.integrate(f1 * u1 + f2 * u2),
            "dissipation": -nu * g.integrate(state.omega ** 2),
            "wall_work": nu * g.wall_integrate(state.omega[:, 0] * state.wall_slip),
            "strain_dissipation": -2.0 * nu * g.integrate(strain),
            "friction": -nu * g.wall_integrate(self.friction * state.wall_slip ** 2),
        }

    def wall_defect(self, state: NSState) -> float:
        target = self.wall_target(state.t, state.wall_slip)
        return float(np.max(np.abs(state.omega[:, 0] - target), initial=0.0))


def init_state(config: NSConfig, grid: Optional[WallGrid] = None) -> NSState:
    """The fluid is at rest for t <= 0"""
    grid = grid or config.build_grid()
    zero = np.zeros((grid.nx, grid.ns))
    return NSState(t=0.0, omega=zero, psi=zero.copy(), u=np.zeros((2, grid.nx, grid.ns)),
                   wall_slip=np.zeros(grid.nx), flux=0.0, top_velocity=0.0)


def step(state: NSState, config: NSConfig, solver: Optional[NSSolver] = None) -> NSState:
    return (solver or NSSolver(config)).step(state)


@dataclass
class NSRun:
    config: NSConfig
    grid: WallGrid
    series: pd.DataFrame
    final: NSState
    snapshots: Dict[float, NSState] = field(default_factory=dict)
    regime: Dict[str, bool] = field(default_factory=dict)
    resolution: str = "unresolved"

    @property
    def energy_drift(self) -> float:
        """max |E - ledger| relative to the largest energy reached"""
        scale = float(self.series["energy"].abs().max())
        if scale == 0.0:
            return 0.0
        return float((self.series["energy"] - self.series["ledger"]).abs().max() / scale)


def _record(solver: NSSolver, state: NSState) -> Dict[str, float]:
    power = solver.power(state)
    speed = np.hypot(state.u[0], state.u[1])
    return {
        "t": state.t,
        "energy": solver.energy(state),
        "u_l2": float(np.sqrt(max(solver.grid.integrate(speed ** 2), 0.0))),
        "u_linf": float(np.max(speed)),
        "omega_linf": float(np.max(np.abs(state.omega))),
        "wall_slip_linf": float(np.max(np.abs(state.wall_slip))),
        "wall_bc_defect": solver.wall_defect(state),
        "flux": state.flux,
        "power": power["work"] + power["dissipation"] + power["wall_work"],
        "power_strain": power["work"] + power["strain_dissipation"] + power["friction"],
        **power,
    }


def run(config: NSConfig, snapshot_times: Sequence[float] = ()) -> NSRun:
    """March to the horizon keeping a diagnostics series, snapshots and checkpoints"""
    solver = NSSolver(config)
    grid = solver.grid
    steps = int(round(config.horizon / solver.dt))
    wanted = sorted(float(t) for t in snapshot_times)
    snapshots: Dict[float, NSState] = {}
    state = init_state(config, grid)
    rows: List[Dict[str, float]] = [_record(solver, state)]
    rows[0]["ledger"] = rows[0]["energy"]
    log.debug(f"NS run: nx={grid.nx} ns={grid.ns} dt={solver.dt:.3g} steps={steps} nu={config.nu:.3g}")

    for n in range(1, steps + 1):
        previous = state
        state = solver.step(state)
        row = _record(solver, state)
        row["ledger"] = rows[-1]["ledger"] + 0.5 * solver.dt * (rows[-1]["power"] + row["power"])
        rows.append(row)
        for t in wanted:
            if t not in snapshots and previous.t < t <= state.t + 1e-12:
                snapshots[t] = state
        if config.progress_every and n % config.progress_every == 0:
            log.progress({"t": round(state.t, 12), "E": row["energy"], "omega_max": row["omega_linf"],
                          "dt": solver.dt})
        if config.checkpoint_every and config.checkpoint_dir and n % config.checkpoint_every == 0:
            folder = Path(config.checkpoint_dir)
            write_field(folder / f"omega_{n:06d}.bin", "omega", state.omega, state.t, grid.describe())
            write_field(folder / f"psi_{n:06d}.bin", "psi", state.psi, state.t, grid.describe())

    series = pd.DataFrame(rows)
    return NSRun(config=config, grid=grid, series=series, final=state, snapshots=snapshots,
                 regime=regime_flags(config), resolution=resolution_tag(grid, config.nu, config.epsilon))


# --- SLIP CONDITION FORMS ---

def vorticity_bc_equivalence_check(u: np.ndarray, omega: np.ndarray, grid: WallGrid,
                                   friction=None) -> Dict[str, float]:
    """
    Residuals of 2 D(u) n . tau - lambda u . tau and (2 kappa - lambda) u . tau - omega
    at the wall (n, tau the inward frame); they coincide for tangent fields up to
    discretization. With the outward normal the stress form reads 2 D(u) n . tau + lambda u . tau,
    so lambda >= 0 removes energy through the wall.
    """
    if friction is None:
        lam = np.zeros(grid.nx)
    elif isinstance(friction, FourierSeries):
        lam = friction.evaluate(grid.x1)[0]
    else:
        lam = np.broadcast_to(np.asarray(friction, dtype=float), (grid.nx,))
    a, b = grid.gradient(u[0]), grid.gradient(u[1])
    n, tau = grid.wall_frame.n, grid.wall_frame.tau
    D11, D22 = a[0][:, 0], b[1][:, 0]
    D12 = 0.5 * (a[1][:, 0] + b[0][:, 0])
    strain_n_tau = 2.0 * (n[0] * (D11 * tau[0] + D12 * tau[1]) + n[1] * (D12 * tau[0] + D22 * tau[1]))
    slip = u[0][:, 0] * tau[0] + u[1][:, 0] * tau[1]
    stress_form = strain_n_tau - lam * slip
    vorticity_form = (2.0 * grid.curvature - lam) * slip - omega[:, 0]
    return {
        "stress_residual": float(np.max(np.abs(stress_form), initial=0.0)),
        "vorticity_residual": float(np.max(np.abs(vorticity_form), initial=0.0)),
        "difference": float(np.max(np.abs(stress_form - vorticity_form), initial=0.0)),
    }
