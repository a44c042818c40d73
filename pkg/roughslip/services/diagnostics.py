"""
Diagnostics
Norms, boundary-layer weights, trace inequalities, the stretching identity and rate fits
"""

from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import erf
from scipy.stats import linregress

from database.schemas import CheckResult
from services.geometry import RoughWall
from services.grids import WallGrid
from utilities.errors import ArityError, ContractError, DecayViolationError, GridMismatchError

# trace tolerance: QUADRATURE_SAFETY times the fine-coarse gap, never below the floor
QUADRATURE_SAFETY = 3.0
QUADRATURE_FLOOR = 1e-8
IDENTITY_TOL = 1e-6
PRECONDITION_TOL = 1e-6
TAIL_TOL = 1e-6
NORM_KINDS = ("L2", "Linf", "L2_phi", "Hs_eps_gamma", "weighted_exp")


# --- WEIGHTS ---

@dataclass(frozen=True)
class WeightSpec:
    """Rescaled viscosity nu~ = nu / eps and the gradient bound m >= 1"""
    nu_tilde: float
    m: float = 1.0

    def __post_init__(self):
        if self.nu_tilde <= 0.0:
            raise ValueError(f"rescaled viscosity must be positive, got {self.nu_tilde}")
        if self.m < 1.0:
            raise ValueError(f"gradient bound m must be at least 1, got {self.m}")


def weight_phi(spec: WeightSpec, z2) -> np.ndarray:
    """phi(z) = sqrt(nu~) int_0^{sqrt(m/nu~) z} exp(-s^2/2) ds"""
    z2 = np.asarray(z2, dtype=float)
    if np.any(z2 < 0.0):
        raise ValueError("the weight is defined for z2 >= 0")
    a = np.sqrt(spec.m / spec.nu_tilde) * z2
    return np.sqrt(spec.nu_tilde) * np.sqrt(np.pi / 2.0) * erf(a / np.sqrt(2.0))


def weight_phi_derivative(spec: WeightSpec, z2) -> np.ndarray:
    z2 = np.asarray(z2, dtype=float)
    return np.sqrt(spec.m) * np.exp(-spec.m * z2 ** 2 / (2.0 * spec.nu_tilde))


# --- NORMS ---

@dataclass(frozen=True)
class NormKind:
    tag: str
    s: int = 0
    gamma: float = 0.0

    def __post_init__(self):
        if self.tag not in NORM_KINDS:
            raise ValueError(f"unknown norm '{self.tag}', expected one of {NORM_KINDS}")
        if self.tag in ("Hs_eps_gamma", "weighted_exp") and not 0.0 <= self.gamma < 2.0 * np.pi:
            raise ValueError(f"gamma must lie in [0, 2 pi), got {self.gamma}")
        if self.tag == "Hs_eps_gamma" and self.s not in (0, 1, 2):
            raise ValueError("H^s_{eps,gamma} norms are available for s <= 2")

    @classmethod
    def l2(cls):
        return cls("L2")

    @classmethod
    def linf(cls):
        return cls("Linf")

    @classmethod
    def l2_phi(cls):
        return cls("L2_phi")

    @classmethod
    def hs_eps_gamma(cls, s: int, gamma: float):
        return cls("Hs_eps_gamma", s=s, gamma=gamma)

    @classmethod
    def weighted_exp(cls, gamma: float):
        return cls("weighted_exp", gamma=gamma)


def _components(field: np.ndarray, grid: WallGrid) -> np.ndarray:
    field = np.asarray(field, dtype=float)
    grid.check_shape(field)
    if field.ndim == 2:
        return field[None]
    if field.ndim == 3:
        return field
    raise GridMismatchError(f"expected a scalar or vector field, got shape {field.shape}")


def _l2(comps: np.ndarray, grid: WallGrid, weight: Union[float, np.ndarray] = 1.0,
        integrate: Optional[Callable[[np.ndarray], float]] = None) -> float:
    integrate = integrate or grid.integrate
    return float(np.sqrt(max(integrate(weight * np.sum(comps ** 2, axis=0)), 0.0)))


def norm(field: np.ndarray, kind: NormKind, grid: WallGrid, epsilon: Optional[float] = None,
         weight: Optional[WeightSpec] = None) -> float:
    comps = _components(field, grid)
    if kind.tag == "L2":
        return _l2(comps, grid)
    if kind.tag == "Linf":
        return float(np.max(np.abs(comps))) if comps.size else 0.0
    if epsilon is None:
        raise ContractError(f"norm '{kind.tag}' needs the roughness scale epsilon")
    if kind.tag == "L2_phi":
        if weight is None:
            raise ContractError("the L2_phi norm needs a WeightSpec")
        # rescaled distance to the wall
        z2 = np.maximum(grid.X2 - grid.wall_height[:, None], 0.0) / epsilon
        return _l2(comps, grid, weight_phi(weight, z2))
    exp_weight = np.exp(2.0 * kind.gamma * grid.X2 / epsilon)
    if kind.tag == "weighted_exp":
        return _l2(comps, grid, exp_weight)
    total = _l2(comps, grid, exp_weight)
    derivatives = comps
    for order in range(1, kind.s + 1):
        derivatives = np.concatenate([np.stack([grid.d1(c), grid.d2(c)]) for c in derivatives])
        total += epsilon ** order * sum(_l2(d[None], grid, exp_weight) for d in derivatives)
    return total


def _require_decay(field: np.ndarray, name: str) -> None:
    head = np.max(np.abs(field))
    tail = np.max(np.abs(field[..., -1]))
    if head > 0.0 and tail > TAIL_TOL * head:
        raise DecayViolationError(f"{name} does not decay at the top of the grid", tail_ratio=float(tail / head))


# --- TRACE INEQUALITIES ---

def trace_constant(grid: WallGrid) -> float:
    """C = sqrt(2) (1 + |h'|_inf^2)^{1/4}"""
    return float(np.sqrt(2.0) * (1.0 + np.max(np.abs(grid.wall_slope)) ** 2) ** 0.25)


def quadrature_tolerance(ratio: Callable[[bool], float]) -> Tuple[float, float, float]:
    """
    Evaluates ratio(coarse) with the grid's rule and with the every-other-node rule.
    Returns the fine ratio, the gap between the two and the tolerance derived from it.
    """
    fine, coarse = ratio(False), ratio(True)
    gap = abs(fine - coarse) if np.isfinite(coarse) else float("inf")
    return fine, gap, max(QUADRATURE_FLOOR, QUADRATURE_SAFETY * gap)


def _integrators(grid: WallGrid, coarse: bool):
    if coarse:
        return grid.integrate_coarse, grid.wall_integrate_coarse
    return grid.integrate, grid.wall_integrate


def _trace_result(name: str, ratio: float, gap: float, tol: float, **details) -> CheckResult:
    return CheckResult(name=name, value=float(ratio), bound=1.0 + tol, passed=bool(ratio <= 1.0 + tol),
                       details={"quadrature_error": float(gap), **details})


def trace_inequality_check(f: np.ndarray, grid: WallGrid, tol: Optional[float] = None) -> CheckResult:
    """
    |f|_{L2(wall)} <= C |f|^{1/2} |d2 f|^{1/2}. Without an explicit tol the
    slack is derived from the quadrature error of the three integrals.
    """
    grid.check_shape(f)
    _require_decay(f, "trace test function")
    if grid.wall_integrate(f[:, 0] ** 2) == 0.0:
        return CheckResult(name="trace_inequality", value=0.0, bound=1.0 + (tol or QUADRATURE_FLOOR), passed=True,
                           degenerate=True)
    C = trace_constant(grid)
    d2f = grid.d2(f)

    def ratio(coarse: bool) -> float:
        integrate, wall_integrate = _integrators(grid, coarse)
        boundary = np.sqrt(max(wall_integrate(f[:, 0] ** 2), 0.0))
        bulk = _l2(f[None], grid, integrate=integrate) * _l2(d2f[None], grid, integrate=integrate)
        return boundary / (C * np.sqrt(bulk)) if bulk > 0.0 else float("inf")

    value, gap, derived = quadrature_tolerance(ratio)
    return _trace_result("trace_inequality", value, gap, derived if tol is None else tol, constant=C)


def _require_tangent_divergence_free(v: np.ndarray, grid: WallGrid, tol: float) -> None:
    scale = max(np.max(np.abs(v)), 1e-300)
    gradient_scale = max(max(np.max(np.abs(grid.gradient(c))) for c in v), 1e-300)
    div = np.max(np.abs(grid.divergence(v)))
    n = grid.wall_frame.n
    normal = np.max(np.abs(v[0][:, 0] * n[0] + v[1][:, 0] * n[1]))
    if div > tol * gradient_scale or normal > tol * scale:
        raise ContractError(f"field is not divergence-free and tangent: |div| = {div:.3e}, |v.n| = {normal:.3e}")


def curl_trace_check(v: np.ndarray, grid: WallGrid, tol: Optional[float] = None,
                     precondition_tol: float = PRECONDITION_TOL) -> CheckResult:
    """|v|_{L2(wall)} <= C |v|^{1/2} |curl v|^{1/2} for tangent divergence-free v"""
    comps = _components(v, grid)
    if not np.any(comps):
        return CheckResult(name="curl_trace", value=0.0, bound=1.0 + (tol or QUADRATURE_FLOOR), passed=True,
                           degenerate=True)
    _require_tangent_divergence_free(comps, grid, precondition_tol)
    _require_decay(comps, "trace test field")
    C = trace_constant(grid)
    curl = grid.curl(comps)[None]

    def ratio(coarse: bool) -> float:
        integrate, wall_integrate = _integrators(grid, coarse)
        boundary = np.sqrt(max(wall_integrate(comps[0][:, 0] ** 2 + comps[1][:, 0] ** 2), 0.0))
        bulk = _l2(comps, grid, integrate=integrate) * _l2(curl, grid, integrate=integrate)
        return boundary / (C * np.sqrt(bulk)) if bulk > 0.0 else float("inf")

    value, gap, derived = quadrature_tolerance(ratio)
    return _trace_result("curl_trace", value, gap, derived if tol is None else tol, constant=C)


def gradient_curl_check(v: np.ndarray, grid: WallGrid, tol: Optional[float] = None,
                        precondition_tol: float = PRECONDITION_TOL) -> CheckResult:
    """|grad v| <= |curl v| + |h''|_inf sqrt(1 + |h'|_inf^2) |v|"""
    comps = _components(v, grid)
    if not np.any(comps):
        return CheckResult(name="gradient_curl", value=0.0, bound=1.0 + (tol or QUADRATURE_FLOOR), passed=True,
                           degenerate=True)
    _require_tangent_divergence_free(comps, grid, precondition_tol)
    gradient = np.concatenate([grid.gradient(c) for c in comps])
    curl = grid.curl(comps)[None]
    C = float(np.max(np.abs(grid.wall_second)) * np.sqrt(1.0 + np.max(np.abs(grid.wall_slope)) ** 2))

    def ratio(coarse: bool) -> float:
        integrate, _ = _integrators(grid, coarse)
        rhs = _l2(curl, grid, integrate=integrate) + C * _l2(comps, grid, integrate=integrate)
        return _l2(gradient, grid, integrate=integrate) / rhs if rhs > 0.0 else float("inf")

    value, gap, derived = quadrature_tolerance(ratio)
    return _trace_result("gradient_curl", value, gap, derived if tol is None else tol, constant=C)


# --- IDENTITIES ---

def stretch_identity_check(v: np.ndarray, u: np.ndarray, grid: WallGrid, tol: float = IDENTITY_TOL,
                           precondition_tol: float = PRECONDITION_TOL) -> CheckResult:
    """
    int v.(v.grad u) = int v.u^perp curl v for tangent divergence-free v and u,
    with u^perp = (-u2, u1). Discrepancy normalized by |v|^2 max(|grad u|_inf, |u|_inf).
    """
    v, u = _components(v, grid), _components(u, grid)
    if not np.any(v):
        return CheckResult(name="stretch_identity", value=0.0, bound=tol, passed=True, degenerate=True)
    _require_tangent_divergence_free(v, grid, precondition_tol)
    if np.any(u):
        _require_tangent_divergence_free(u, grid, precondition_tol)
    grad_u = [grid.gradient(c) for c in u]
    stretching = v[0] * (v[0] * grad_u[0][0] + v[1] * grad_u[0][1]) + v[1] * (v[0] * grad_u[1][0] + v[1] * grad_u[1][1])
    lhs = grid.integrate(stretching)
    rhs = grid.integrate((-v[0] * u[1] + v[1] * u[0]) * grid.curl(v))
    scale = _l2(v, grid) ** 2 * max(max(np.max(np.abs(g)) for g in grad_u), np.max(np.abs(u)))
    discrepancy = abs(lhs - rhs) / scale if scale > 0.0 else abs(lhs - rhs)
    return CheckResult(name="stretch_identity", value=float(discrepancy), bound=tol, passed=bool(discrepancy < tol),
                       details={"lhs": float(lhs), "rhs": float(rhs)})


# --- SCALINGS ---

def rate_fit(epsilons: Union[Sequence[float], Iterable[Tuple[float, float]]],
             values: Optional[Sequence[float]] = None) -> Tuple[float, float]:
    """Least-squares slope and r^2 of log(value) against log(eps)"""
    if values is None:
        pairs = [tuple(p) for p in epsilons]
        eps = np.array([p[0] for p in pairs], dtype=float)
        vals = np.array([p[1] for p in pairs], dtype=float)
    else:
        eps, vals = np.asarray(epsilons, dtype=float), np.asarray(values, dtype=float)
    if len(eps) != len(vals):
        raise ValueError("rate fit needs one value per epsilon")
    if len(eps) < 3:
        raise ArityError(f"rate fit needs at least 3 points, got {len(eps)}")
    if np.any(vals <= 0.0) or np.any(eps <= 0.0):
        raise ValueError("rate fit needs positive values")
    fit = linregress(np.log(eps), np.log(vals))
    return float(fit.slope), float(fit.rvalue ** 2)


def rescaled_l2_scaling_check(profile: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray], gamma: float,
                              epsilons: Sequence[float], wall_for: Callable[[float], RoughWall],
                              decay_rate: Optional[float] = None, height_in_cells: float = 40.0,
                              nodes_per_panel: int = 24,
                              profile_for: Optional[Callable[[float], Callable]] = None) -> CheckResult:
    """
    |exp(gamma x2/eps) f(x1, x/eps)|_{L2} across eps; LHS/sqrt(eps) must stay
    bounded (spread < 2) and the log-log slope is reported.
    profile(x1, z1, z2) is the two-scale function, wall_for(eps) the physical wall;
    profile_for(eps) replaces profile when the function itself depends on eps.
    """
    if decay_rate is not None and gamma >= decay_rate:
        raise DecayViolationError(f"weight rate {gamma} is not below the decay rate {decay_rate}",
                                  tail_ratio=float("inf"))
    values = []
    for eps in epsilons:
        nx = max(64, int(round(16 / eps)))
        grid = WallGrid.spectral(wall_for(eps), nx, height_in_cells * eps, eps, nodes_per_panel)
        f_eps = profile_for(eps) if profile_for is not None else profile
        f = f_eps(grid.X1, grid.X1 / eps, grid.X2 / eps)
        values.append(_l2(np.asarray(f)[None] if np.ndim(f) == 2 else np.asarray(f), grid,
                          np.exp(2.0 * gamma * grid.X2 / eps)))
    values = np.array(values)
    if not np.any(values):
        return CheckResult(name="rescaled_l2_scaling", value=0.0, bound=2.0, passed=True, degenerate=True,
                           details={"values": values.tolist()})
    ratios = values / np.sqrt(np.asarray(epsilons))
    spread = float(np.max(ratios) / np.min(ratios))
    details = {"values": values.tolist(), "ratios": ratios.tolist()}
    if len(epsilons) >= 3:
        details["slope"], details["r2"] = rate_fit(epsilons, values)
    return CheckResult(name="rescaled_l2_scaling", value=spread, bound=2.0, passed=bool(spread < 2.0),
                       details=details)


def gradient_bound_m(velocities: Sequence[np.ndarray], grid: WallGrid, epsilon: float) -> float:
    """m = 1 + max over stored snapshots of |grad_z u|_inf with grad_z = eps grad_x"""
    peak = 0.0
    for u in velocities:
        comps = _components(u, grid)
        g = np.concatenate([grid.gradient(c) for c in comps])
        peak = max(peak, float(np.max(np.sqrt(np.sum(g ** 2, axis=0)))))
    return 1.0 + epsilon * peak


def summarize(results: List[CheckResult]) -> bool:
    return all(r.passed for r in results)
