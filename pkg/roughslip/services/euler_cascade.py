"""
Euler Cascade
Base Euler flow in the flat channel, divergence-free lifting of wall traces and linearized correctors
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.linalg import lu_factor, lu_solve

from services import spectral
from utilities.errors import CFLViolationError, DependencyError, InputError
from utilities import log

CFL_LIMIT = 0.5
LIFT_INNER = 0.25
LIFT_OUTER = 0.5


# --- FORCING ---

@dataclass(frozen=True)
class ForcingMode:
    """A t^p trig(2 pi m x1) b(x2) in one velocity component, switched on at t = 0"""
    component: int = 1
    wavenumber: int = 1
    phase: str = "cos"
    amplitude: float = 1.0
    ramp_power: int = 2
    profile: str = "gaussian"
    center: float = 1.5
    width: float = 0.5

    def __post_init__(self):
        if self.component not in (1, 2):
            raise ValueError("forcing component must be 1 or 2")
        if self.phase not in ("cos", "sin"):
            raise ValueError("forcing phase must be 'cos' or 'sin'")
        if self.profile not in ("gaussian", "uniform"):
            raise ValueError("forcing profile must be 'gaussian' or 'uniform'")
        if self.ramp_power < 0 or self.width <= 0.0:
            raise ValueError("ramp power must be >= 0 and width positive")

    def ramp(self, t: float) -> float:
        return self.amplitude * t ** self.ramp_power if t >= 0.0 else 0.0

    def horizontal(self, x1) -> Tuple[np.ndarray, np.ndarray]:
        k = 2.0 * np.pi * self.wavenumber
        x1 = np.asarray(x1, dtype=float)
        if self.phase == "cos":
            return np.cos(k * x1), -k * np.sin(k * x1)
        return np.sin(k * x1), k * np.cos(k * x1)

    def vertical(self, x2) -> Tuple[np.ndarray, np.ndarray]:
        x2 = np.asarray(x2, dtype=float)
        if self.profile == "uniform":
            return np.ones_like(x2), np.zeros_like(x2)
        xi = (x2 - self.center) / self.width
        b = np.exp(-xi ** 2)
        return b, -2.0 * xi / self.width * b


@dataclass(frozen=True)
class ForcingSpec:
    """Sum of separable modes; optionally switched off after a given time"""
    modes: Tuple[ForcingMode, ...] = (ForcingMode(),)
    switch_off: Optional[float] = None

    def _active(self, t: float) -> float:
        return 0.0 if self.switch_off is not None and t > self.switch_off else 1.0

    def force(self, t: float, X1, X2) -> Tuple[np.ndarray, np.ndarray]:
        X1, X2 = np.broadcast_arrays(np.asarray(X1, float), np.asarray(X2, float))
        f = [np.zeros(X1.shape), np.zeros(X1.shape)]
        on = self._active(t)
        for mode in self.modes:
            a = mode.ramp(t) * on
            if a == 0.0:
                continue
            f[mode.component - 1] += a * mode.horizontal(X1)[0] * mode.vertical(X2)[0]
        return f[0], f[1]

    def curl(self, t: float, X1, X2) -> np.ndarray:
        X1, X2 = np.broadcast_arrays(np.asarray(X1, float), np.asarray(X2, float))
        total = np.zeros(X1.shape)
        on = self._active(t)
        for mode in self.modes:
            a = mode.ramp(t) * on
            if a == 0.0:
                continue
            trig, dtrig = mode.horizontal(X1)
            b, db = mode.vertical(X2)
            if mode.component == 1:
                total -= a * trig * db
            else:
                total += a * dtrig * b
        return total

    def x1_momentum(self, t: float, height: float) -> float:
        """int over the flat channel of f1"""
        total = 0.0
        for mode in self.modes:
            if mode.component != 1 or mode.wavenumber != 0 or mode.phase != "cos":
                continue
            vertical, _ = quad(lambda y: float(mode.vertical(y)[0]), 0.0, height, limit=200)
            total += mode.ramp(t) * self._active(t) * vertical
        return total


# --- CHANNEL DISCRETIZATION ---

@dataclass(frozen=True)
class EulerGrid:
    nx1: int = 32
    nx2: int = 96
    height: float = 8.0
    dt: float = 0.01
    snapshot_stride: int = 5


class ChannelOperators:
    """Fourier in x1 (period 1) times Chebyshev Gauss-Lobatto in x2 on [0, L], wall at index 0"""

    def __init__(self, grid: EulerGrid):
        self.grid = grid
        self.nx1, self.ny = grid.nx1, grid.nx2 + 1
        self.x1 = spectral.fourier_nodes(grid.nx1)
        x, D = spectral.chebyshev(grid.nx2)
        L = grid.height
        self.x2 = L * (1.0 - x) / 2.0
        self.D2 = -(2.0 / L) * D
        self.D22 = self.D2 @ self.D2
        self.weights_x2 = spectral.clenshaw_curtis_weights(grid.nx2) * L / 2.0
        self.bary = spectral.barycentric_weights(grid.nx2)
        self.X1, self.X2 = np.meshgrid(self.x1, self.x2, indexing="ij")
        gaps = np.diff(self.x2)
        self.local_dx2 = np.minimum(np.r_[gaps[0], gaps], np.r_[gaps, gaps[-1]])
        self.k = np.fft.rfftfreq(self.nx1, d=1.0 / self.nx1) * 2.0 * np.pi
        self._poisson = []
        for k in self.k:
            A = self.D22 - k ** 2 * np.eye(self.ny)
            A[0] = 0.0
            A[0, 0] = 1.0
            A[-1] = 0.0
            A[-1, -1] = 1.0
            self._poisson.append(lu_factor(A))

    def d1(self, f: np.ndarray, order: int = 1) -> np.ndarray:
        return spectral.fourier_derivative(f, axis=-2, order=order)

    def d2(self, f: np.ndarray) -> np.ndarray:
        return f @ self.D2.T

    def integrate(self, f: np.ndarray) -> float:
        return float(np.mean(f, axis=-2) @ self.weights_x2)

    def solve_streamfunction(self, omega: np.ndarray, top_value: float) -> np.ndarray:
        """Lap psi = -omega, psi = 0 at x2 = 0 and psi = top_value at x2 = L"""
        rhs = -np.fft.rfft(omega, axis=0)
        rhs[:, 0] = 0.0
        rhs[:, -1] = 0.0
        rhs[0, -1] = top_value * self.nx1
        psi_hat = np.empty_like(rhs)
        for j, lu in enumerate(self._poisson):
            psi_hat[j] = lu_solve(lu, rhs[j].real) + 1j * lu_solve(lu, rhs[j].imag)
        return np.fft.irfft(psi_hat, n=self.nx1, axis=0)

    def velocity(self, psi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.d2(psi), -self.d1(psi)

    def curl(self, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
        return self.d1(u2) - self.d2(u1)

    def advect(self, u1, u2, f) -> np.ndarray:
        return u1 * self.d1(f) + u2 * self.d2(f)

    def cfl_number(self, u1: np.ndarray, u2: np.ndarray, dt: float) -> float:
        dx1 = 1.0 / self.nx1
        return float(dt * np.max(np.abs(u1) / dx1 + np.abs(u2) / self.local_dx2))


# --- STATES AND SERIES ---

@dataclass
class EulerState:
    t: float
    omega: np.ndarray
    psi: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    flux: float


@dataclass
class ChannelSeries:
    """Fields on the channel grid at every time step; splines serve intermediate times"""
    grid: EulerGrid
    times: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    omega: np.ndarray
    flux: np.ndarray
    _splines: Dict[str, CubicSpline] = field(default_factory=dict, repr=False)

    def spline(self, name: str) -> CubicSpline:
        if name not in self._splines:
            self._splines[name] = CubicSpline(self.times, getattr(self, name), axis=0)
        return self._splines[name]

    def at(self, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.spline("u1")(t), self.spline("u2")(t), self.spline("omega")(t)

    @property
    def snapshot_indices(self) -> np.ndarray:
        return np.arange(0, len(self.times), self.grid.snapshot_stride)

    @property
    def snapshot_times(self) -> np.ndarray:
        return self.times[self.snapshot_indices]


@dataclass
class EulerSeries(ChannelSeries):
    psi: np.ndarray = None

    def state(self, index: int) -> EulerState:
        return EulerState(t=float(self.times[index]), omega=self.omega[index], psi=self.psi[index],
                          u1=self.u1[index], u2=self.u2[index], flux=float(self.flux[index]))


@dataclass
class CorrectorState:
    """u^k at one time, split into the lift of the wall trace and the homogeneous part U^k"""
    t: float
    order: int
    u1: np.ndarray
    u2: np.ndarray
    lift_u1: np.ndarray
    lift_u2: np.ndarray

    @property
    def homogeneous(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.u1 - self.lift_u1, self.u2 - self.lift_u2


@dataclass
class CorrectorSeries(ChannelSeries):
    """u^k = lift + homogeneous part; h is the wall trace on snapshot times"""
    order: int = 0
    lift_u1: np.ndarray = None
    lift_u2: np.ndarray = None
    trace: np.ndarray = None

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.u1) or np.any(self.u2))

    def state(self, index: int) -> CorrectorState:
        return CorrectorState(t=float(self.times[index]), order=self.order, u1=self.u1[index], u2=self.u2[index],
                              lift_u1=self.lift_u1[index], lift_u2=self.lift_u2[index])


def zero_corrector(order: int, base: ChannelSeries, trace: Optional[np.ndarray] = None) -> CorrectorSeries:
    shape = base.u1.shape
    return CorrectorSeries(grid=base.grid, times=base.times, u1=np.zeros(shape), u2=np.zeros(shape),
                           omega=np.zeros(shape), flux=np.zeros(len(base.times)), order=order,
                           lift_u1=np.zeros(shape), lift_u2=np.zeros(shape),
                           trace=trace if trace is not None else np.zeros((len(base.snapshot_times), shape[1])))


def _rk4(rhs: Callable, state: Tuple[np.ndarray, float], t: float, dt: float) -> Tuple[np.ndarray, float]:
    w, q = state
    k1 = rhs(t, w, q)
    k2 = rhs(t + dt / 2, w + dt / 2 * k1[0], q + dt / 2 * k1[1])
    k3 = rhs(t + dt / 2, w + dt / 2 * k2[0], q + dt / 2 * k2[1])
    k4 = rhs(t + dt, w + dt * k3[0], q + dt * k3[1])
    return (w + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            q + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))


def _require_quiet_start(forcing, ops: ChannelOperators, dt: float) -> None:
    before = -dt
    f1, f2 = forcing.force(before, ops.X1, ops.X2)
    if np.any(forcing.curl(before, ops.X1, ops.X2)) or np.any(f1) or np.any(f2):
        raise InputError("forcing must vanish for t < 0")


def solve_euler_base(forcing, grid: EulerGrid, horizon: float) -> EulerSeries:
    """RK4 for the vorticity of u0 with Biot-Savart inversion per Fourier mode"""
    if grid.dt <= 0.0 or horizon <= 0.0:
        raise InputError("time step and horizon must be positive")
    ops = ChannelOperators(grid)
    _require_quiet_start(forcing, ops, grid.dt)
    steps = int(round(horizon / grid.dt))
    times = np.arange(steps + 1) * grid.dt

    def rhs(t, w, q):
        psi = ops.solve_streamfunction(w, q)
        u1, u2 = ops.velocity(psi)
        f1, _ = forcing.force(t, ops.X1, ops.X2)
        dw = spectral.dealias(forcing.curl(t, ops.X1, ops.X2) - ops.advect(u1, u2, w), axis=0)
        dq = ops.integrate(f1 - ops.advect(u1, u2, u1))
        return dw, dq

    omega = np.zeros((steps + 1, ops.nx1, ops.ny))
    u1s, u2s, psis = np.zeros_like(omega), np.zeros_like(omega), np.zeros_like(omega)
    flux = np.zeros(steps + 1)
    w, q = omega[0], 0.0
    for n in range(steps):
        psi = ops.solve_streamfunction(w, q)
        u1, u2 = ops.velocity(psi)
        cfl = ops.cfl_number(u1, u2, grid.dt)
        if cfl > CFL_LIMIT:
            raise CFLViolationError(f"Euler step {n} at t={times[n]:.4f}", cfl)
        psis[n], u1s[n], u2s[n] = psi, u1, u2
        w, q = _rk4(rhs, (w, q), times[n], grid.dt)
        omega[n + 1], flux[n + 1] = w, q
    psi = ops.solve_streamfunction(w, q)
    psis[-1] = psi
    u1s[-1], u2s[-1] = ops.velocity(psi)
    log.debug(f"Euler base: {steps} steps, max|u| = {np.max(np.hypot(u1s, u2s)):.4g}")
    return EulerSeries(grid=grid, times=times, u1=u1s, u2=u2s, omega=omega, flux=flux, psi=psis)


# --- LIFTING ---

def smoothstep7(xi: np.ndarray) -> np.ndarray:
    xi = np.clip(xi, 0.0, 1.0)
    return xi ** 4 * (35.0 - 84.0 * xi + 70.0 * xi ** 2 - 20.0 * xi ** 3)


def lift_cutoff(x2: np.ndarray, inner: float = LIFT_INNER, outer: float = LIFT_OUTER) -> np.ndarray:
    return 1.0 - smoothstep7((x2 - inner) / (outer - inner))


def lift_trace(h: np.ndarray, ops: ChannelOperators, chi: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    u~ = grad^perp(chi(x2) H(x1)) with H' = h, using the discrete operators so the
    discrete divergence is zero to round-off. h has the slow x1 axis last-but-none: shape (..., nx1).
    """
    chi = lift_cutoff(ops.x2) if chi is None else chi
    H = spectral.antiderivative(h, axis=-1)
    dH = spectral.fourier_derivative(H, axis=-1)
    dchi = ops.D2 @ chi
    return -H[..., :, None] * dchi, dH[..., :, None] * chi


# --- CORRECTORS ---

def wall_jet(series: ChannelSeries, orders: int, indices: Sequence[int], ops: Optional[ChannelOperators] = None) -> List[np.ndarray]:
    """
    [d2^m u(t, x1, 0)] for m = 0..orders-1 at the given time indices, each of shape (2, len(indices), nx1).
    Normal derivatives of u2 use d2 u2 = -d1 u1.
    """
    ops = ops or ChannelOperators(series.grid)
    u1 = series.u1[np.asarray(indices)]
    jet, current = [], u1
    wall_u2 = series.u2[np.asarray(indices)][..., 0]
    for m in range(orders):
        if m == 0:
            jet.append(np.stack([current[..., 0], wall_u2]))
        else:
            u2_m = -ops.d1(previous)[..., 0]
            jet.append(np.stack([current[..., 0], u2_m]))
        previous = current
        current = ops.d2(current)
    return jet


def forcing_from_correctors(order: int, correctors: Dict[int, ChannelSeries], t: float,
                            ops: ChannelOperators) -> Tuple[np.ndarray, np.ndarray]:
    """F^k = -sum_{j=1}^{k-1} u^j . grad u^{k-j}"""
    f1 = np.zeros((ops.nx1, ops.ny))
    f2 = np.zeros((ops.nx1, ops.ny))
    for j in range(1, order):
        for needed in (j, order - j):
            if needed not in correctors:
                raise DependencyError(f"corrector u^{order} needs u^{needed}")
        a, b = correctors[j], correctors[order - j]
        if getattr(a, "is_zero", False) or getattr(b, "is_zero", False):
            continue
        a1, a2, _ = a.at(t)
        b1, b2, _ = b.at(t)
        f1 -= ops.advect(a1, a2, b1)
        f2 -= ops.advect(a1, a2, b2)
    return f1, f2


def solve_linearized(order: int, trace: np.ndarray, trace_times: np.ndarray, base: ChannelSeries,
                     correctors: Dict[int, ChannelSeries]) -> CorrectorSeries:
    """
    u^k = u~ + U with u~ lifting the wall trace h^k and U solving the linearization about u0:
    d_t U + u0 . grad U + U . grad u0 + grad p = F^k - d_t u~ - u0 . grad u~ - u~ . grad u0,
    U . e2 = 0 on both walls, zero initial data.
    """
    for j in range(1, order):
        if j not in correctors:
            raise DependencyError(f"corrector u^{order} needs u^{j}")
    forcing_zero = all(getattr(correctors[j], "is_zero", False) or getattr(correctors[order - j], "is_zero", False)
                       for j in range(1, order))
    if forcing_zero and not np.any(trace):
        return zero_corrector(order, base, trace)

    grid = base.grid
    ops = ChannelOperators(grid)
    h_spline = CubicSpline(trace_times, trace, axis=0)
    dh_spline = h_spline.derivative()
    chi = lift_cutoff(ops.x2)

    def lifted(t):
        return lift_trace(h_spline(t), ops, chi)

    def rhs(t, w, q):
        psi = ops.solve_streamfunction(w, q)
        U1, U2 = ops.velocity(psi)
        b1, b2, bw = base.at(t)
        l1, l2 = lifted(t)
        dl1, dl2 = lift_trace(dh_spline(t), ops, chi)
        F1, F2 = forcing_from_correctors(order, correctors, t, ops) if not forcing_zero else (0.0, 0.0)
        G1 = F1 - dl1 - ops.advect(b1, b2, l1) - ops.advect(l1, l2, b1)
        G2 = F2 - dl2 - ops.advect(b1, b2, l2) - ops.advect(l1, l2, b2)
        dw = ops.curl(G1, G2) - ops.advect(b1, b2, w) - ops.advect(U1, U2, bw)
        dq = ops.integrate(G1 - ops.advect(b1, b2, U1) - ops.advect(U1, U2, b1))
        return spectral.dealias(dw, axis=0), dq

    times = base.times
    nt = len(times)
    u1 = np.zeros((nt, ops.nx1, ops.ny))
    u2, omega, lift1, lift2 = (np.zeros_like(u1) for _ in range(4))
    flux = np.zeros(nt)
    w, q = np.zeros((ops.nx1, ops.ny)), 0.0
    for n in range(nt):
        psi = ops.solve_streamfunction(w, q)
        U1, U2 = ops.velocity(psi)
        l1, l2 = lifted(times[n])
        lift1[n], lift2[n] = l1, l2
        u1[n], u2[n] = U1 + l1, U2 + l2
        omega[n] = ops.curl(u1[n], u2[n])
        flux[n] = q
        if n + 1 < nt:
            w, q = _rk4(rhs, (w, q), times[n], times[n + 1] - times[n])
    log.debug(f"corrector u^{order}: max|u| = {np.max(np.hypot(u1, u2)):.4g}")
    return CorrectorSeries(grid=grid, times=times, u1=u1, u2=u2, omega=omega, flux=flux, order=order,
                           lift_u1=lift1, lift_u2=lift2, trace=trace)
