import pytest
import numpy as np

from services.geometry import RoughWall
from services.grids import WallGrid, flat_wall_grid, spectral_panels, tanh_stretched_nodes
from utilities.errors import ContractError, GridMismatchError

TWO_PI = 2.0 * np.pi


@pytest.fixture
def rough_wall(default_profile):
    return RoughWall(default_profile, 0.1, 1.0, 1.0)


class TestStretchedNodes:
    """tanh clustering at the wall"""

    def test_layer_node_position(self):
        s, g = tanh_stretched_nodes(48, 4.0, 0.2)
        assert g > 0.0
        assert s[16] == pytest.approx(0.2, rel=1e-10)
        assert s[0] == 0.0 and s[-1] == 4.0
        assert np.all(np.diff(s) > 0.0)

    def test_uniform_when_layer_is_thick(self):
        s, g = tanh_stretched_nodes(12, 3.0, 2.0)
        assert g == 0.0
        assert np.allclose(s, np.linspace(0.0, 3.0, 13))

    def test_layer_outside_height(self):
        with pytest.raises(ContractError):
            tanh_stretched_nodes(12, 1.0, 1.5)


class TestSpectralPanels:

    def test_breaks_are_clipped(self):
        assert spectral_panels(1.0, 0.1, 8) == [(0.0, 0.4), (0.4, 1.0)]
        assert len(spectral_panels(40.0, 0.5, 8)) == 4


class TestWallGrid:
    """Derivatives and quadrature on boundary-fitted grids"""

    def test_spectral_derivatives_of_smooth_field(self, rough_wall):
        grid = WallGrid.spectral(rough_wall, 32, 4.0, 0.5, 16)
        f = np.sin(TWO_PI * grid.X1) * np.exp(-grid.X2)
        assert np.allclose(grid.d1(f), TWO_PI * np.cos(TWO_PI * grid.X1) * np.exp(-grid.X2), atol=1e-8)
        assert np.allclose(grid.d2(f), -f, atol=1e-8)

    def test_area_of_strip(self, rough_wall):
        grid = WallGrid.spectral(rough_wall, 32, 4.0, 0.5, 16)
        # the profile has mean 2, so the wall encloses 0.2 below the strip
        assert grid.integrate(np.ones((grid.nx, grid.ns))) == pytest.approx(4.0 - 0.2, rel=1e-12)

    def test_finite_difference_area(self, rough_wall):
        grid = WallGrid.stretched(rough_wall, 64, 65, 4.0, 0.5)
        assert grid.integrate(np.ones((grid.nx, grid.ns))) == pytest.approx(3.8, rel=1e-3)

    def test_wall_lies_on_first_row(self, rough_wall):
        grid = WallGrid.stretched(rough_wall, 16, 17, 2.0, 0.3)
        assert np.allclose(grid.X2[:, 0], grid.wall_height)
        assert np.allclose(grid.X2[:, -1], 2.0)

    def test_curl_and_divergence_of_potential_flow(self, rough_wall):
        grid = WallGrid.spectral(rough_wall, 32, 4.0, 0.5, 24)
        # u = grad(cos(2 pi x1) exp(-2 pi x2)) is harmonic
        phi_x1 = -TWO_PI * np.sin(TWO_PI * grid.X1) * np.exp(-TWO_PI * grid.X2)
        phi_x2 = -TWO_PI * np.cos(TWO_PI * grid.X1) * np.exp(-TWO_PI * grid.X2)
        u = np.stack([phi_x1, phi_x2])
        assert np.max(np.abs(grid.divergence(u))) < 1e-6
        assert np.max(np.abs(grid.curl(u))) < 1e-6

    def test_wall_integral_is_arclength(self):
        grid = flat_wall_grid(16, 1.0, 0.1, 8)
        assert grid.wall_integrate(np.ones(grid.nx)) == pytest.approx(1.0)
        assert np.allclose(grid.curvature, 0.0)

    def test_shape_mismatch(self, rough_wall):
        grid = WallGrid.stretched(rough_wall, 16, 17, 2.0, 0.3)
        with pytest.raises(GridMismatchError):
            grid.check_shape(np.zeros((16, 9)))

    def test_describe(self, rough_wall):
        grid = WallGrid.stretched(rough_wall, 16, 17, 2.0, 0.3)
        info = grid.describe()
        assert info["kind"] == "finite_difference"
        assert (info["nx"], info["ns"]) == (16, 17)
        assert info["height"] == pytest.approx(2.0)

    def test_unknown_kind(self, rough_wall):
        grid = WallGrid.stretched(rough_wall, 8, 9, 2.0, 0.3)
        with pytest.raises(ValueError, match="grid kind"):
            WallGrid(x1=grid.x1, s=grid.s, s_weights=grid.s_weights, mapping=grid.mapping, kind="mesh")
