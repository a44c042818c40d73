"""
Boundary-Fitted Wall Grids
Tensor grids in (x1~, s) over a rough wall with physical derivatives and quadrature
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from services.geometry import FlatteningMap, RoughWall, frame_from_slope
from services import spectral
from utilities.errors import ContractError, GridMismatchError

GRID_KINDS = ("finite_difference", "spectral")
PANEL_BREAKS = (4.0, 16.0, 64.0)


def _tanh_map(xi: np.ndarray, g: float, height: float) -> np.ndarray:
    # H (1 - tanh(g(1 - xi)) / tanh(g)) written without cancellation near the wall
    return height * np.sinh(g * xi) / (np.sinh(g) * np.cosh(g * (1.0 - xi)))


def tanh_stretched_nodes(n: int, height: float, layer: float, fraction: float = 1.0 / 3.0) -> Tuple[np.ndarray, float]:
    """
    n + 1 nodes s = H (1 - tanh(g (1 - xi)) / tanh(g)) on [0, H] with the node
    of index round(fraction * n) placed at s = layer. Returns the nodes and g.
    """
    if not 0.0 < layer < height:
        raise ContractError(f"layer thickness {layer:.3g} must lie in (0, {height:.3g})")
    i_layer = max(1, int(round(fraction * n)))
    xi = i_layer / n
    uniform = height * xi
    if layer >= uniform:
        return np.linspace(0.0, height, n + 1), 0.0

    def position(g: float) -> float:
        return float(_tanh_map(np.array([xi]), g, height)[0]) - layer

    gamma = brentq(position, 1e-8, 200.0, xtol=1e-14)
    xi_all = np.arange(n + 1) / n
    s = _tanh_map(xi_all, gamma, height)
    s[0], s[-1] = 0.0, height
    return s, gamma


def spectral_panels(height: float, scale: float, nodes: int) -> List[Tuple[float, float]]:
    """Panels [0,4e], [4e,16e], [16e,64e], [64e,H] clipped to the height"""
    breaks = [0.0] + [b * scale for b in PANEL_BREAKS if b * scale < height] + [height]
    return list(zip(breaks[:-1], breaks[1:]))


@dataclass
class WallGrid:
    """
    Grid of a periodic strip above a rough wall.
    Physical points are x2 = mapping.to_physical(x1, s) for x1 uniform on one period.
    """
    x1: np.ndarray
    s: np.ndarray
    s_weights: np.ndarray
    mapping: FlatteningMap
    kind: str = "finite_difference"
    panels: List[slice] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise ValueError(f"unknown grid kind '{self.kind}'")
        self.period = self.mapping.wall.period
        self.nx, self.ns = len(self.x1), len(self.s)
        X1, S = np.meshgrid(self.x1, self.s, indexing="ij")
        self.X1, self.S = X1, S
        self.X2 = self.mapping.to_physical(X1, S)
        self.metric = self.mapping.metric(X1, S)
        self.wall_height, self.wall_slope, self.wall_second = self.mapping.wall.height(self.x1)
        self.wall_frame = frame_from_slope(self.wall_slope)
        self.curvature = self.wall_second / self.wall_frame.bracket ** 3
        self.area_weights = (self.period / self.nx) * self.s_weights[None, :] * self.metric.jacobian
        self._build_derivatives()

    # --- CONSTRUCTORS ---

    @classmethod
    def stretched(cls, wall: RoughWall, nx: int, ns: int, height: float, layer: float,
                  fraction: float = 1.0 / 3.0):
        """Second-order finite differences: periodic in x1, tanh-stretched in s"""
        s, _ = tanh_stretched_nodes(ns - 1, height, layer, fraction)
        mapping = FlatteningMap(wall, blend_height=height)
        x1 = spectral.fourier_nodes(nx, wall.period)
        return cls(x1=x1, s=s, s_weights=spectral.trapezoid_weights(s), mapping=mapping,
                   kind="finite_difference")

    @classmethod
    def spectral(cls, wall: RoughWall, nx: int, height: float, scale: float, nodes_per_panel: int = 24):
        """Fourier in x1, Clenshaw-Curtis panels in s graded with the layer scale"""
        mapping = FlatteningMap(wall, blend_height=height)
        x1 = spectral.fourier_nodes(nx, wall.period)
        s_parts, w_parts, slices = [], [], []
        x, _ = spectral.chebyshev(nodes_per_panel)
        w_ref = spectral.clenshaw_curtis_weights(nodes_per_panel)
        start = 0
        for a, b in spectral_panels(height, scale, nodes_per_panel):
            # ascending nodes within each panel
            s_parts.append(a + (b - a) * (1.0 - x) / 2.0)
            w_parts.append(w_ref * (b - a) / 2.0)
            slices.append(slice(start, start + nodes_per_panel + 1))
            start += nodes_per_panel + 1
        return cls(x1=x1, s=np.concatenate(s_parts), s_weights=np.concatenate(w_parts),
                   mapping=mapping, kind="spectral", panels=slices)

    # --- DERIVATIVES ---

    def _build_derivatives(self):
        if self.kind == "finite_difference":
            self.Dx, self.Dxx = spectral.periodic_fd_matrices(self.nx, self.period)
            self.Ds, self.Dss = spectral.nonuniform_fd_matrices(self.s)
        else:
            self.Dx = sp.csr_matrix(spectral.fourier_diff_matrix(self.nx, 1, self.period))
            self.Dxx = sp.csr_matrix(spectral.fourier_diff_matrix(self.nx, 2, self.period))
            blocks, blocks2 = [], []
            for sl in self.panels:
                a, b = self.s[sl][0], self.s[sl][-1]
                _, D = spectral.chebyshev(sl.stop - sl.start - 1)
                Dp = -2.0 / (b - a) * D
                blocks.append(Dp)
                blocks2.append(Dp @ Dp)
            self.Ds = sp.block_diag(blocks, format="csr")
            self.Dss = sp.block_diag(blocks2, format="csr")

    def d_x1_flat(self, f: np.ndarray) -> np.ndarray:
        return self.Dx @ f

    def d_s(self, f: np.ndarray) -> np.ndarray:
        return (self.Ds @ f.T).T

    def d1(self, f: np.ndarray) -> np.ndarray:
        return self.d_x1_flat(f) + self.metric.p * self.d_s(f)

    def d2(self, f: np.ndarray) -> np.ndarray:
        return self.metric.q * self.d_s(f)

    def gradient(self, f: np.ndarray) -> np.ndarray:
        return np.stack([self.d1(f), self.d2(f)])

    def curl(self, v: np.ndarray) -> np.ndarray:
        return self.d1(v[1]) - self.d2(v[0])

    def divergence(self, v: np.ndarray) -> np.ndarray:
        return self.d1(v[0]) + self.d2(v[1])

    # --- QUADRATURE ---

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(self.area_weights * f))

    def wall_integrate(self, g: np.ndarray) -> float:
        """Boundary integral with the exact arclength element <h'> dx1"""
        return float(np.sum(g * self.wall_frame.bracket) * self.period / self.nx)

    def _coarse_x1_weights(self) -> np.ndarray:
        w = np.zeros(self.nx)
        if self.nx % 2:
            w[:] = self.period / self.nx
        else:
            w[::2] = 2.0 * self.period / self.nx
        return w

    def _coarse_s_weights(self) -> np.ndarray:
        """Every other s node: Clenshaw-Curtis of half degree on each panel, trapezoid otherwise"""
        w = np.zeros(self.ns)
        if self.kind == "finite_difference":
            keep = np.unique(np.append(np.arange(0, self.ns, 2), self.ns - 1))
            w[keep] = spectral.trapezoid_weights(self.s[keep])
            return w
        for sl in self.panels:
            n = sl.stop - sl.start - 1
            if n % 2:
                w[sl] = spectral.trapezoid_weights(self.s[sl])
            else:
                a, b = self.s[sl.start], self.s[sl.stop - 1]
                w[sl.start:sl.stop:2] = spectral.clenshaw_curtis_weights(n // 2) * (b - a) / 2.0
        return w

    def integrate_coarse(self, f: np.ndarray) -> float:
        """Area integral on every other node; its gap to integrate() bounds the quadrature error"""
        weights = self._coarse_x1_weights()[:, None] * self._coarse_s_weights()[None, :] * self.metric.jacobian
        return float(np.sum(weights * f))

    def wall_integrate_coarse(self, g: np.ndarray) -> float:
        return float(np.sum(g * self.wall_frame.bracket * self._coarse_x1_weights()))

    def check_shape(self, f: np.ndarray) -> None:
        if f.shape[-2:] != (self.nx, self.ns):
            raise GridMismatchError(f"field shape {f.shape} does not match grid ({self.nx}, {self.ns})")

    # --- RESOLUTION ---

    def cells_within(self, thickness: float) -> int:
        return int(np.count_nonzero(self.s[1:] <= thickness))

    def spacing_x1(self) -> float:
        return self.period / self.nx

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "nx": self.nx,
            "ns": self.ns,
            "period": self.period,
            "height": float(self.s[-1]),
            "blend_height": self.mapping.blend_height,
        }


def flat_wall_grid(nx: int, height: float, scale: float, nodes_per_panel: int = 24,
                   period: float = 1.0, wall: Optional[RoughWall] = None) -> WallGrid:
    return WallGrid.spectral(wall or RoughWall.flat(period), nx, height, scale, nodes_per_panel)
