"""
Multiscale Approximation
Couples interior correctors with boundary-layer cells and evaluates u^app, its residual and amplitude scalings
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from services.cell_solver import (CellDiscretization, CellGrid, CellProblemData, CellSolutionCache,
                                  LayerProfile, assemble_layer, boundary_operator_B,
                                  compatibility_source_h, solve_dirichlet_cell, solve_neumann_cell)
from services.diagnostics import rate_fit
from services.euler_cascade import (ChannelOperators, ChannelSeries, EulerSeries,
                                    solve_linearized, wall_jet)
from services.geometry import DomainParams
from services.grids import WallGrid
from services import spectral
from utilities.errors import ArityError, InternalConsistencyError, ResolutionError
from utilities import log

STRUCTURAL_ZERO_TOL = 1e-12
SLOPE_TOL = 0.25
MIN_LAYER_CELLS = 4


# --- CASCADE ---

@dataclass
class CascadeSolution:
    domain: DomainParams
    order: int
    base: EulerSeries
    correctors: Dict[int, ChannelSeries]
    layers: Dict[int, LayerProfile]
    disc: CellDiscretization
    snapshot_indices: np.ndarray
    snapshot_times: np.ndarray
    raw_h: Dict[int, np.ndarray]
    cache: CellSolutionCache


def _slow_derivative(values: np.ndarray) -> np.ndarray:
    # slow x1 is axis 1 of (t, x1, z1, z2) arrays
    return spectral.fourier_derivative(values, axis=1)


def solve_cascade(domain: DomainParams, base: EulerSeries, order: int,
                  cell_grid: CellGrid = CellGrid()) -> CascadeSolution:
    """
    For k = 1..N: wall-flux sums of the known correctors, the compatibility
    source h^k, the cell layers psi^k and phi^k, then the interior corrector u^k.
    """
    if order < 1:
        raise ValueError("approximation order must be at least 1")
    disc = CellDiscretization.for_domain(domain, cell_grid)
    ops = ChannelOperators(base.grid)
    indices = base.snapshot_indices
    times = base.times[indices]
    n0 = domain.n0
    jet_orders = order // (n0 + 1) + 1
    sample_shape = (len(indices), base.grid.nx1)
    cache = CellSolutionCache()

    correctors: Dict[int, ChannelSeries] = {0: base}
    jets = {0: wall_jet(base, jet_orders, indices, ops)}
    layers: Dict[int, LayerProfile] = {}
    raw_h: Dict[int, np.ndarray] = {}
    zero_source = np.zeros(sample_shape + (disc.M, disc.Ns))

    for k in range(1, order + 1):
        boundary_sum = np.zeros(sample_shape + (disc.M,))
        for j in range(k):
            if j > 0 and correctors[j].is_zero:
                continue
            boundary_sum += boundary_operator_B(k - j, jets[j], domain, disc.z1)

        prior = layers.get(k - n0)
        if prior is not None and np.any(prior.velocity):
            source_psi = -_slow_derivative(prior.velocity[0])
            source_phi = -_slow_derivative(prior.velocity[1])
        else:
            source_psi, source_phi = zero_source, zero_source

        h = compatibility_source_h(k, source_psi, boundary_sum, disc)
        raw_h[k] = h
        if k <= n0:
            scale = max(1.0, float(np.max(np.abs(boundary_sum), initial=0.0)))
            if np.max(np.abs(h), initial=0.0) > STRUCTURAL_ZERO_TOL * scale:
                raise InternalConsistencyError(f"h^{k} should vanish, max |h| = {np.max(np.abs(h)):.3e}")
            h = np.zeros_like(h)

        wall_datum = -boundary_sum - h[..., None] / disc.frame.bracket
        psi = solve_neumann_cell(CellProblemData(k, source_psi, wall_datum), disc)
        phi, _ = solve_dirichlet_cell(CellProblemData(k, source_phi, np.zeros_like(wall_datum)), disc)
        layer = assemble_layer(k, psi, phi, disc)
        layers[k] = layer
        cache.insert_layer(layer)

        corrector = solve_linearized(k, h, times, base, correctors)
        correctors[k] = corrector
        if corrector.is_zero:
            jets[k] = [np.zeros((2,) + sample_shape) for _ in range(jet_orders)]
        else:
            jets[k] = wall_jet(corrector, jet_orders, indices, ops)
        log.debug(f"cascade order {k}: max|h| = {np.max(np.abs(h), initial=0.0):.3e}, "
                  f"layer decay rate {layer.decay_rate:.3f}")

    return CascadeSolution(domain=domain, order=order, base=base, correctors=correctors, layers=layers,
                           disc=disc, snapshot_indices=indices, snapshot_times=times, raw_h=raw_h, cache=cache)


# --- TWO-SCALE EVALUATION ---

class ChannelField:
    """Scalar field on the flat channel grid at every base time step"""

    def __init__(self, values: np.ndarray, times: np.ndarray, ops: ChannelOperators):
        self.values, self.times, self.ops = values, times, ops

    def _like(self, values: np.ndarray) -> "ChannelField":
        return ChannelField(values, self.times, self.ops)

    def dx(self, i: int) -> "ChannelField":
        return self._like(self.ops.d1(self.values) if i == 1 else self.ops.d2(self.values))

    def dt(self) -> "ChannelField":
        return self._like(CubicSpline(self.times, self.values, axis=0).derivative()(self.times))

    def at(self, t: float) -> np.ndarray:
        hit = np.flatnonzero(np.abs(self.times - t) < 1e-12)
        if hit.size:
            return self.values[hit[0]]
        return CubicSpline(self.times, self.values, axis=0)(t)

    def evaluate(self, t: float, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        columns = spectral.fourier_interp_matrix(self.ops.nx1, x1) @ self.at(t)
        return spectral.barycentric_eval(self.ops.x2, self.ops.bary, columns, x2)


class TwoScaleField:
    """F(t, x1, z) on snapshots x slow x1 nodes x cell collocation points, evaluated at z = x / eps"""

    def __init__(self, values: np.ndarray, times: np.ndarray, disc: CellDiscretization, epsilon: float):
        self.values, self.times, self.disc, self.epsilon = values, times, disc, epsilon

    def _like(self, values: np.ndarray) -> "TwoScaleField":
        return TwoScaleField(values, self.times, self.disc, self.epsilon)

    def dx(self, i: int) -> "TwoScaleField":
        """Physical derivative: (1/eps) d_zi + delta_i1 d_x1(slow)"""
        if i == 1:
            return self._like(self.disc.d1(self.values) / self.epsilon + _slow_derivative(self.values))
        return self._like(self.disc.d2(self.values) / self.epsilon)

    def dt(self) -> "TwoScaleField":
        return self._like(CubicSpline(self.times, self.values, axis=0).derivative()(self.times))

    def at(self, t: float) -> np.ndarray:
        hit = np.flatnonzero(np.abs(self.times - t) < 1e-12)
        if hit.size:
            return self.values[hit[0]]
        return CubicSpline(self.times, self.values, axis=0)(t)

    def evaluate(self, t: float, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        disc, eps = self.disc, self.epsilon
        x1 = np.asarray(x1, dtype=float)
        z1 = np.mod(x1 / eps, 1.0)
        slow = spectral.fourier_interp_matrix(self.values.shape[1], x1)
        fast = spectral.fourier_interp_matrix(disc.M, z1)
        columns = np.einsum("pa,pm,aml->pl", slow, fast, self.at(t), optimize=True)
        z2 = np.asarray(x2, dtype=float) / eps
        s = disc.mapping.to_flat(z1[:, None], z2, tol=1e-9)
        values = disc.vertical.interpolate(columns, np.minimum(s, disc.grid.z_max))
        return np.where(z2 > disc.grid.z_max, 0.0, values)


class ApproxField:
    """Linear combination of channel and two-scale fields"""

    def __init__(self, terms: Sequence[Tuple[float, object]] = ()):
        self.terms = list(terms)

    def __add__(self, other: "ApproxField") -> "ApproxField":
        return ApproxField(self.terms + other.terms)

    def scaled(self, factor: float) -> "ApproxField":
        return ApproxField([(c * factor, f) for c, f in self.terms])

    def dx(self, i: int) -> "ApproxField":
        return ApproxField([(c, f.dx(i)) for c, f in self.terms])

    def dt(self) -> "ApproxField":
        return ApproxField([(c, f.dt()) for c, f in self.terms])

    def evaluate(self, t: float, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        total = np.zeros(np.shape(x2))
        for c, f in self.terms:
            total += c * f.evaluate(t, x1, x2)
        return total


def curl_of(u1: ApproxField, u2: ApproxField) -> ApproxField:
    return u2.dx(1) + u1.dx(2).scaled(-1.0)


def divergence_of(u1: ApproxField, u2: ApproxField) -> ApproxField:
    return u1.dx(1) + u2.dx(2)


class ApproximationBundle:
    """
    u^app = u0 + sum_k eps^{alpha k} u^k + sum_k eps^{alpha k} v^k_bl(t, x1, x / eps),
    truncated at order N.
    """

    def __init__(self, order: int, cascade: CascadeSolution):
        if order > cascade.order:
            raise ValueError(f"cascade was solved to order {cascade.order}, cannot build order {order}")
        self.order = order
        self.cascade = cascade
        self.domain = cascade.domain
        eps, a = self.domain.epsilon, self.domain.amplitude
        base = cascade.base
        ops = ChannelOperators(base.grid)
        self.base_u1 = ApproxField([(1.0, ChannelField(base.u1, base.times, ops))])
        self.base_u2 = ApproxField([(1.0, ChannelField(base.u2, base.times, ops))])
        interior1, interior2, layer1, layer2 = [], [], [], []
        for k in range(1, order + 1):
            corrector = cascade.correctors[k]
            if not corrector.is_zero:
                interior1.append((a ** k, ChannelField(corrector.u1, corrector.times, ops)))
                interior2.append((a ** k, ChannelField(corrector.u2, corrector.times, ops)))
            layer = cascade.layers[k]
            if np.any(layer.velocity):
                times = cascade.snapshot_times
                layer1.append((a ** k, TwoScaleField(layer.velocity[0], times, cascade.disc, eps)))
                layer2.append((a ** k, TwoScaleField(layer.velocity[1], times, cascade.disc, eps)))
        self.interior_u1, self.interior_u2 = ApproxField(interior1), ApproxField(interior2)
        self.layer_u1, self.layer_u2 = ApproxField(layer1), ApproxField(layer2)
        self.u1 = self.base_u1 + self.interior_u1 + self.layer_u1
        self.u2 = self.base_u2 + self.interior_u2 + self.layer_u2

    @property
    def snapshot_times(self) -> np.ndarray:
        return self.cascade.snapshot_times

    @cached_property
    def vorticity(self) -> ApproxField:
        return curl_of(self.u1, self.u2)

    @cached_property
    def vorticity_gradient(self) -> Tuple[ApproxField, ApproxField]:
        return self.vorticity.dx(1), self.vorticity.dx(2)

    @cached_property
    def vorticity_rate(self) -> ApproxField:
        return self.vorticity.dt()

    @cached_property
    def divergence(self) -> ApproxField:
        return divergence_of(self.u1, self.u2)

    @cached_property
    def layer_curl(self) -> ApproxField:
        return curl_of(self.layer_u1, self.layer_u2)

    def velocity(self, t: float, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return np.stack([self.u1.evaluate(t, x1, x2), self.u2.evaluate(t, x1, x2)])

    def layer_velocity(self, t: float, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return np.stack([self.layer_u1.evaluate(t, x1, x2), self.layer_u2.evaluate(t, x1, x2)])

    def interior_velocity(self, t: float, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return np.stack([self.interior_u1.evaluate(t, x1, x2), self.interior_u2.evaluate(t, x1, x2)])

    def base_velocity(self, t: float, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return np.stack([self.base_u1.evaluate(t, x1, x2), self.base_u2.evaluate(t, x1, x2)])


def build_uapp(order: int, domain: DomainParams, euler: EulerSeries,
               layers: Optional[CascadeSolution] = None,
               cell_grid: CellGrid = CellGrid()) -> ApproximationBundle:
    cascade = layers if layers is not None else solve_cascade(domain, euler, order, cell_grid)
    if cascade.domain != domain:
        raise ValueError("cascade was solved for a different domain")
    return ApproximationBundle(order, cascade)


# --- RESIDUALS ---

def require_layer_resolution(grid: WallGrid, epsilon: float) -> None:
    cells = grid.cells_within(epsilon)
    if cells < MIN_LAYER_CELLS or grid.spacing_x1() > epsilon / MIN_LAYER_CELLS:
        raise ResolutionError(
            f"grid has {cells} cells across the layer and dx1 = {grid.spacing_x1():.3g}; "
            f"need {MIN_LAYER_CELLS} cells per eps = {epsilon:.3g}"
        )


def residual_curl(bundle: ApproximationBundle, forcing, grid: WallGrid, t: float) -> Dict[str, float]:
    """
    r = d_t omega + u . grad omega + omega div u - curl f for omega = curl u^app;
    the curl of the momentum residual of u^app without reference to pressure.
    """
    require_layer_resolution(grid, bundle.domain.epsilon)
    r = residual_field(bundle, forcing, grid, t)
    return {"linf": float(np.max(np.abs(r))), "l2": float(np.sqrt(grid.integrate(r ** 2)))}


def residual_field(bundle: ApproximationBundle, forcing, grid: WallGrid, t: float) -> np.ndarray:
    x1, X2 = grid.x1, grid.X2
    u1, u2 = bundle.u1.evaluate(t, x1, X2), bundle.u2.evaluate(t, x1, X2)
    omega = bundle.vorticity.evaluate(t, x1, X2)
    w1, w2 = (f.evaluate(t, x1, X2) for f in bundle.vorticity_gradient)
    rate = bundle.vorticity_rate.evaluate(t, x1, X2)
    div = bundle.divergence.evaluate(t, x1, X2)
    return rate + u1 * w1 + u2 * w2 + omega * div - forcing.curl(t, grid.X1, X2)


# --- AMPLITUDE SCALINGS ---

@dataclass
class AmplitudeMeasurement:
    epsilon: float
    values: Dict[str, float] = field(default_factory=dict)


def measure_amplitudes(bundle: ApproximationBundle, forcing, grid: WallGrid,
                       times: Optional[Sequence[float]] = None) -> AmplitudeMeasurement:
    """Sup over snapshot times of the bounded quantities of the approximation"""
    require_layer_resolution(grid, bundle.domain.epsilon)
    times = bundle.snapshot_times[1:] if times is None else times
    x1, X2 = grid.x1, grid.X2
    wall_x2 = grid.X2[:, :1]
    n = grid.wall_frame.n
    out = {name: 0.0 for name in AMPLITUDE_FAMILIES}
    for t in times:
        interior = bundle.interior_velocity(t, x1, X2)
        layer = bundle.layer_velocity(t, x1, X2)
        residual = residual_field(bundle, forcing, grid, t)
        wall_u = bundle.velocity(t, x1, wall_x2)[..., 0]
        current = {
            "interior_linf": np.max(np.hypot(*interior)),
            "layer_linf": np.max(np.hypot(*layer)),
            "layer_l2": np.sqrt(grid.integrate(layer[0] ** 2 + layer[1] ** 2)),
            "layer_curl_linf": np.max(np.abs(bundle.layer_curl.evaluate(t, x1, X2))),
            "residual_curl_linf": np.max(np.abs(residual)),
            "residual_curl_l2": np.sqrt(grid.integrate(residual ** 2)),
            "boundary_defect": np.max(np.abs(wall_u[0] * n[0] + wall_u[1] * n[1])),
            "divergence_defect": np.max(np.abs(bundle.divergence.evaluate(t, x1, X2))),
        }
        for name, value in current.items():
            out[name] = max(out[name], float(value))
    return AmplitudeMeasurement(epsilon=bundle.domain.epsilon, values=out)


AMPLITUDE_FAMILIES = (
    "interior_linf", "layer_linf", "layer_l2", "layer_curl_linf",
    "residual_curl_linf", "residual_curl_l2", "boundary_defect", "divergence_defect",
)


def predicted_exponents(alpha: float, order: int) -> Dict[str, Tuple[float, str]]:
    """Predicted eps-exponent and comparison ('approx' within tolerance, 'at_least')"""
    return {
        "interior_linf": (alpha + 1.0, "approx"),
        "layer_linf": (alpha, "approx"),
        "layer_l2": (alpha + 0.5, "approx"),
        "layer_curl_linf": (alpha * (order + 1) - 1.0, "at_least"),
        "residual_curl_linf": (alpha, "approx"),
        "residual_curl_l2": (alpha + 0.5, "approx"),
        "boundary_defect": (alpha * (order + 1), "at_least"),
        "divergence_defect": (alpha * (order + 1) - 1.0, "at_least"),
    }


@dataclass
class BoundReport:
    family: str
    predicted: float
    comparison: str
    slope: Optional[float]
    r2: Optional[float]
    passed: bool
    degenerate: bool = False


def verify_amplitude_bounds(measurements: Sequence[AmplitudeMeasurement], alpha: float, order: int,
                            tol: float = SLOPE_TOL) -> List[BoundReport]:
    if len(measurements) < 3:
        raise ArityError(f"slope fits need at least 3 values of eps, got {len(measurements)}")
    eps = np.array([m.epsilon for m in measurements])
    reports = []
    for family, (predicted, comparison) in predicted_exponents(alpha, order).items():
        values = np.array([m.values.get(family, 0.0) for m in measurements])
        if np.all(values == 0.0):
            reports.append(BoundReport(family, predicted, comparison, None, None, True, degenerate=True))
            continue
        slope, r2 = rate_fit(eps, values)
        if comparison == "approx":
            passed = abs(slope - predicted) <= tol
        else:
            passed = slope >= predicted - tol
        reports.append(BoundReport(family, predicted, comparison, slope, r2, bool(passed)))
    return reports
