"""
Boundary-Layer Cell Solver
Laplace cell problems above one roughness period, wall-flux coefficients B_k and sources h^k
"""

import math
import threading
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from services.geometry import DomainParams, FlatteningMap, FourierSeries, RoughWall, frame_from_slope
from services import spectral
from utilities.errors import (ArityError, CompatibilityError, DecayViolationError,
                              InternalConsistencyError)
from utilities import log

COMPATIBILITY_TOL = 1e-10
MEAN_ZERO_TOL = 1e-10
SOURCE_DECAY_TOL = 1e-6
DECAY_FIT_WINDOW = (1.0, 3.0)
CERTIFICATE_GAMMA = 0.9
REFINEMENT_STEPS = 2
# mode coefficients below this fraction of the field maximum are round-off
ROUNDOFF_FLOOR = 1e-11


@dataclass(frozen=True)
class CellGrid:
    n_z1: int = 32
    n_z2: int = 40
    z_max: float = 8.0
    stretch: float = 6.0


@dataclass
class CellProblemData:
    """Source on the cell (..., M, Ns) and wall datum (..., M); leading axes are slow samples"""
    order: int
    source: np.ndarray
    boundary: np.ndarray


@dataclass
class LayerProfile:
    order: int
    psi: np.ndarray
    phi: np.ndarray
    velocity: np.ndarray  # (2, ..., M, Ns)
    divergence: np.ndarray
    curl: np.ndarray
    decay_rate: float
    far_field: Optional[np.ndarray] = None


class CellDiscretization:
    """
    Fourier x mapped-Chebyshev collocation of one cell {z1 in T, z2 > a eta(z1)}.
    The flattening is blended so the truncation line z2 = z_max is flat, where a
    Dirichlet-to-Neumann row closes the exterior decaying harmonic field.
    """

    def __init__(self, amplitude: float, profile: FourierSeries, grid: CellGrid = CellGrid()):
        self.amplitude = float(amplitude)
        self.profile = profile
        self.grid = grid
        self.M, self.Ns = grid.n_z1, grid.n_z2
        self.wall = RoughWall(profile, self.amplitude, 1.0, 1.0)
        self.mapping = FlatteningMap(self.wall, blend_height=grid.z_max)
        self.vertical = spectral.ExponentialChebyshevMap(self.Ns - 1, grid.z_max, grid.stretch)
        self.z1 = spectral.fourier_nodes(self.M)
        self.s = self.vertical.s
        Z1, S = np.meshgrid(self.z1, self.s, indexing="ij")
        self.z2 = self.mapping.to_physical(Z1, S)
        self.metric = self.mapping.metric(Z1, S)
        self.eta, self.eta_prime, self.eta_second = profile.evaluate(self.z1)
        self.frame = frame_from_slope(self.amplitude * self.eta_prime)
        self.Dx = spectral.fourier_diff_matrix(self.M, 1)
        self.Dxx = spectral.fourier_diff_matrix(self.M, 2)
        self.Ds, self.Dss = self.vertical.Ds, self.vertical.Dss
        self.area_weights = self.vertical.weights_s[None, :] * self.metric.jacobian / self.M
        self._factors: Dict[str, tuple] = {}
        self._lock = threading.Lock()

    @classmethod
    def for_domain(cls, domain: DomainParams, grid: CellGrid = CellGrid()):
        return cls(domain.amplitude, domain.profile, grid)

    # --- FIELD OPERATORS ---

    def d_flat_z1(self, f: np.ndarray) -> np.ndarray:
        return np.einsum("ij,...jl->...il", self.Dx, f)

    def d_s(self, f: np.ndarray) -> np.ndarray:
        return np.einsum("lm,...im->...il", self.Ds, f)

    def d1(self, f: np.ndarray) -> np.ndarray:
        return self.d_flat_z1(f) + self.metric.p * self.d_s(f)

    def d2(self, f: np.ndarray) -> np.ndarray:
        return self.metric.q * self.d_s(f)

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        return self.d1(self.d1(f)) + self.d2(self.d2(f))

    def integrate(self, f: np.ndarray) -> np.ndarray:
        return np.sum(f * self.area_weights, axis=(-2, -1))

    def wall_integrate(self, g: np.ndarray) -> np.ndarray:
        """int g dsigma with dsigma = <a eta'> dz1"""
        return np.sum(g * self.frame.bracket, axis=-1) / self.M

    # --- LINEAR SYSTEMS ---

    def _operator(self, kind: str) -> np.ndarray:
        M, Ns = self.M, self.Ns
        IM, IS = np.eye(M), np.eye(Ns)
        Gx, Gs = np.kron(self.Dx, IS), np.kron(IM, self.Ds)
        a11, a22, a12, b2 = self.metric.laplacian_coefficients
        A = (np.kron(self.Dxx, IS)
             + a12.reshape(-1, 1) * np.kron(self.Dx, self.Ds)
             + a22.reshape(-1, 1) * np.kron(IM, self.Dss)
             + b2.reshape(-1, 1) * Gs)
        wall = np.arange(M) * Ns
        top = wall + Ns - 1
        if kind == "neumann":
            d1 = Gx + self.metric.p.reshape(-1, 1) * Gs
            d2 = self.metric.q.reshape(-1, 1) * Gs
            slope = (self.amplitude * self.eta_prime)[:, None]
            A[wall] = (-slope * d1[wall] + d2[wall]) / self.frame.bracket[:, None]
        else:
            A[wall] = 0.0
            A[wall, wall] = 1.0
        # the truncation line is flat: q = 1, p = 0 there
        E_top = np.zeros((Ns, Ns))
        E_top[-1, -1] = 1.0
        A[top] = Gs[top] + np.kron(spectral.dtn_matrix(M), E_top)[top]
        if kind == "neumann":
            n = M * Ns
            bordered = np.zeros((n + 1, n + 1))
            bordered[:n, :n] = A
            bordered[top, n] = 1.0
            bordered[n, top] = 1.0 / M
            return bordered
        return A

    def factor(self, kind: str) -> Tuple[np.ndarray, np.ndarray, tuple]:
        """
        Operator, row scales and LU of the row-equilibrated operator. Wall rows and
        near-wall Laplacian rows differ in size by many orders of magnitude.
        """
        with self._lock:
            if kind not in self._factors:
                log.debug(f"factorizing {kind} cell operator ({self.M}x{self.Ns}, a={self.amplitude:.4g})")
                A = self._operator(kind)
                scale = 1.0 / np.max(np.abs(A), axis=1)
                self._factors[kind] = (A, scale, lu_factor(scale[:, None] * A))
            return self._factors[kind]

    def solve(self, kind: str, source: np.ndarray, boundary: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Batched solve; returns the fields (..., M, Ns) and the bordering multipliers"""
        sample_shape = source.shape[:-2]
        batch = int(np.prod(sample_shape, dtype=int))
        rhs = source.reshape(batch, self.M, self.Ns).copy()
        rhs[:, :, 0] = boundary.reshape(batch, self.M)
        rhs[:, :, -1] = 0.0
        rhs = rhs.reshape(batch, -1).T
        if kind == "neumann":
            rhs = np.vstack([rhs, np.zeros((1, batch))])
        A, scale, lu = self.factor(kind)
        # one call over every column: the factor is never shared between threads
        solution = lu_solve(lu, scale[:, None] * rhs)
        for _ in range(REFINEMENT_STEPS):
            solution += lu_solve(lu, scale[:, None] * (rhs - A @ solution))
        if kind == "neumann":
            multipliers, solution = solution[-1], solution[:-1]
        else:
            multipliers = np.zeros(batch)
        field = solution.T.reshape(sample_shape + (self.M, self.Ns))
        return field, multipliers.reshape(sample_shape)

    # --- SAMPLING ---

    def sample_columns(self, f: np.ndarray, z2: np.ndarray) -> np.ndarray:
        """Values on horizontal lines z2 at every collocation column z1_i; zero above z_max"""
        z2 = np.asarray(z2, dtype=float)
        Z1, Z2 = np.meshgrid(self.z1, z2, indexing="ij")
        s = self.mapping.to_flat(Z1, Z2)
        values = self.vertical.interpolate(f, np.minimum(s, self.grid.z_max))
        return np.where(Z2 > self.grid.z_max, 0.0, values)


class CellSolutionCache:
    """Layer samples keyed by (order, x1 index, t index); safe for concurrent inserts of distinct keys"""

    def __init__(self):
        self._store: Dict[Tuple[int, int, int], Tuple[np.ndarray, np.ndarray]] = {}
        self._lock = threading.Lock()

    def put(self, key: Tuple[int, int, int], psi: np.ndarray, phi: np.ndarray) -> None:
        with self._lock:
            self._store[key] = (psi, phi)

    def get(self, key: Tuple[int, int, int]) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        with self._lock:
            return self._store.get(key)

    def __len__(self) -> int:
        with self._lock:
            return len(self._store)

    def insert_layer(self, layer: LayerProfile) -> None:
        nt, nx = layer.psi.shape[:2]
        for n in range(nt):
            for i in range(nx):
                self.put((layer.order, i, n), layer.psi[n, i], layer.phi[n, i])


# --- WALL FLUX COEFFICIENTS ---

def wall_flux_coefficient(k: int, wall_jet: Sequence[np.ndarray], n0: int, amplitude: float,
                          eta: np.ndarray, eta_prime: np.ndarray) -> np.ndarray:
    """
    eps^{alpha k} coefficient of <eps^alpha eta'> u(x1, eps^{1+alpha} eta) . n / <eps^alpha eta'>.
    wall_jet[m] holds (d2^m u1, d2^m u2) at x2 = 0, stacked on axis 0.
    """
    if k < 1:
        raise ValueError(f"B_k is defined for k >= 1, got {k}")
    period = n0 + 1
    m_u2 = k // period if k % period == 0 else None
    m_u1 = (k - 1) // period if (k - 1) % period == 0 else None
    needed = max(m for m in (m_u2, m_u1, -1) if m is not None)
    if needed >= len(wall_jet):
        raise ArityError(f"B_{k} needs wall-jet orders up to {needed}, got {len(wall_jet)}")
    sample_shape = np.shape(wall_jet[0][0])
    total = np.zeros(sample_shape + np.shape(eta))
    if m_u2 is not None:
        total += eta ** m_u2 / math.factorial(m_u2) * np.asarray(wall_jet[m_u2][1])[..., None]
    if m_u1 is not None:
        total -= eta_prime * eta ** m_u1 / math.factorial(m_u1) * np.asarray(wall_jet[m_u1][0])[..., None]
    bracket = np.sqrt(1.0 + (amplitude * eta_prime) ** 2)
    return total / bracket


def boundary_operator_B(k: int, wall_jet: Sequence[np.ndarray], domain: DomainParams, z1) -> np.ndarray:
    eta, eta_prime, _ = domain.profile.evaluate(z1)
    return wall_flux_coefficient(k, wall_jet, domain.n0, domain.amplitude, eta, eta_prime)


def compatibility_source_h(k: int, source: np.ndarray, boundary_sum: np.ndarray,
                           disc: CellDiscretization, tol: float = MEAN_ZERO_TOL) -> np.ndarray:
    """
    h^k = int_cell S dz - int_wall <a eta'> sum_j B_{k-j}[u^j] dz1 on every slow sample,
    where S = -d_x1 v^{k-N0}_{bl,1}. The slow x1 axis is the last sample axis.

    Takes the assembled source S and the summed wall coefficients sum_j B_{k-j}[u^j]
    rather than the prior layers and wall jets, so the caller (the cascade) owns how
    they are built and the same pair feeds the Neumann solve.
    """
    h = disc.integrate(source) - np.sum(boundary_sum * disc.frame.bracket, axis=-1) / disc.M
    if h.ndim >= 1 and h.size:
        drift = np.max(np.abs(np.mean(h, axis=-1)))
        if drift > tol * max(1.0, float(np.max(np.abs(h)))):
            raise InternalConsistencyError(f"h^{k} has nonzero x1-mean {drift:.3e}")
    return h


# --- CELL PROBLEMS ---

def _require_source_decay(source: np.ndarray, disc: CellDiscretization) -> None:
    head = float(np.max(np.abs(source), initial=0.0))
    if head == 0.0:
        return
    tail = float(np.max(np.abs(source[..., disc.s > 0.75 * disc.grid.z_max]), initial=0.0))
    if tail > SOURCE_DECAY_TOL * head:
        raise DecayViolationError(f"cell source does not decay (tail/head {tail / head:.3e})", tail / head)


def solve_neumann_cell(data: CellProblemData, disc: CellDiscretization,
                       tol: float = COMPATIBILITY_TOL) -> np.ndarray:
    """
    Delta psi = S, n . grad psi = g on the wall, zero mean on the truncation line.

    The bordering multiplier mu is the compatibility defect of the discrete operator;
    it leaves d_s psi_0 = -mu on the truncation line. Adding the harmonic mu (z2 - z_max)
    moves the defect onto the wall flux so the gradient decays in the far field.
    """
    source, boundary = np.asarray(data.source, float), np.asarray(data.boundary, float)
    if not np.any(source) and not np.any(boundary):
        return np.zeros(source.shape)
    _require_source_decay(source, disc)
    interior = disc.integrate(source)
    flux = disc.wall_integrate(boundary)
    scale = disc.integrate(np.abs(source)) + disc.wall_integrate(np.abs(boundary))
    mismatch = interior + flux
    worst = int(np.argmax(np.abs(mismatch) - tol * scale)) if np.ndim(mismatch) else 0
    if np.any(np.abs(mismatch) > tol * np.maximum(scale, 1e-300)):
        raise CompatibilityError(f"Neumann cell data of order {data.order} are incompatible",
                                 float(np.ravel(mismatch)[worst]))
    psi, mu = disc.solve("neumann", source, boundary)
    log.debug(f"Neumann cell order {data.order}: discrete compatibility defect {np.max(np.abs(mu)):.3e}")
    return psi + np.asarray(mu)[..., None, None] * (disc.z2 - disc.grid.z_max)


def solve_dirichlet_cell(data: CellProblemData, disc: CellDiscretization) -> Tuple[np.ndarray, np.ndarray]:
    """Delta phi = S, phi = 0 on the wall; returns phi and its far-field constant Q0"""
    source = np.asarray(data.source, float)
    if not np.any(source):
        return np.zeros(source.shape), np.zeros(source.shape[:-2])
    _require_source_decay(source, disc)
    phi, _ = disc.solve("dirichlet", source, np.zeros(source.shape[:-1]))
    return phi, np.mean(phi[..., -1], axis=-1)


def measured_decay_rate(velocity: np.ndarray, disc: CellDiscretization,
                        window: Tuple[float, float] = DECAY_FIT_WINDOW) -> float:
    """-slope of log max|v| against s over the window"""
    rows = (disc.s >= window[0]) & (disc.s <= window[1])
    magnitude = np.max(np.abs(velocity[..., rows]).reshape(-1, int(rows.sum())), axis=0)
    if np.any(magnitude <= 0.0) or rows.sum() < 2:
        return float("inf")
    slope = np.polyfit(disc.s[rows], np.log(magnitude), 1)[0]
    return float(-slope)


def assemble_layer(order: int, psi: np.ndarray, phi: np.ndarray, disc: CellDiscretization) -> LayerProfile:
    """v = grad psi + grad^perp phi with grad^perp = (-d2, d1)"""
    v1 = disc.d1(psi) - disc.d2(phi)
    v2 = disc.d2(psi) + disc.d1(phi)
    velocity = np.stack([v1, v2])
    divergence = disc.d1(v1) + disc.d2(v2)
    curl = disc.d1(v2) - disc.d2(v1)
    rate = measured_decay_rate(velocity, disc) if np.any(velocity) else float("inf")
    return LayerProfile(order=order, psi=psi, phi=phi, velocity=velocity,
                        divergence=divergence, curl=curl, decay_rate=rate)


def weighted_decay_certificate(layer: LayerProfile, disc: CellDiscretization,
                               gamma: float = CERTIFICATE_GAMMA) -> float:
    """sup of exp(gamma z2) |v|; finite values certify decay at the rate gamma"""
    return float(np.max(np.exp(gamma * disc.z2) * np.abs(layer.velocity), initial=0.0))


def far_field_modes(field: np.ndarray, disc: CellDiscretization, z2: np.ndarray) -> np.ndarray:
    """Fourier coefficients in z1 along horizontal lines: shape (..., M, len(z2))"""
    return np.fft.fft(disc.sample_columns(field, z2), axis=-2) / disc.M


def fit_mode_decay(field: np.ndarray, disc: CellDiscretization, modes: Sequence[int],
                   window: Tuple[float, float] = DECAY_FIT_WINDOW, samples: int = 21) -> Dict[int, float]:
    """
    Fitted exponential decay rate of each listed z1 mode over the window. Samples
    where the mode has fallen to the round-off floor are left out of the fit; a mode
    with fewer than three samples above the floor gets a nan rate.
    """
    z2 = np.linspace(window[0], window[1], samples)
    coefficients = np.abs(far_field_modes(field, disc, z2))
    floor = ROUNDOFF_FLOOR * float(np.max(np.abs(field), initial=0.0))
    rates = {}
    for j in modes:
        keep = coefficients[j] > floor
        if keep.sum() < 3:
            log.debug(f"mode {j} is below the round-off floor on z2 in {window}")
            rates[int(j)] = float("nan")
            continue
        slope = np.polyfit(z2[keep], np.log(coefficients[j][keep]), 1)[0]
        rates[int(j)] = float(-slope)
    return rates
