import pytest
import numpy as np

from services.geometry import FourierSeries, RoughWall
from services.manufactured import ExpLinear, Wave, channel_test_flow, rough_wall_test_flow

TWO_PI = 2.0 * np.pi
X = np.linspace(0.0, 1.0, 13)


class TestBuildingBlocks:

    def test_wave_derivative(self):
        wave = Wave(((TWO_PI, 1.0, 0.5),))
        expected = -TWO_PI * np.sin(TWO_PI * X) + 0.5 * TWO_PI * np.cos(TWO_PI * X)
        assert np.allclose(wave.derivative()(X), expected, atol=1e-13)

    def test_wave_product(self):
        a = Wave(((TWO_PI, 1.0, 0.0),))
        b = Wave(((2 * TWO_PI, 0.0, 1.0), (0.0, 3.0, 0.0)))
        assert np.allclose((a * b)(X), a(X) * b(X), atol=1e-13)

    def test_wave_from_series(self, default_profile):
        wave = Wave.from_series(default_profile, scale=0.1, wavelength=0.5)
        assert np.allclose(wave(X), 0.1 * default_profile.evaluate(X / 0.5)[0], atol=1e-14)

    def test_wave_from_sine_series(self):
        series = FourierSeries.from_triples([(1, 0.0, 0.5)])
        assert np.allclose(Wave.from_series(series)(X), series.evaluate(X)[0], atol=1e-14)

    def test_exp_linear_derivative(self):
        d = ExpLinear(1.0, 2.0, -3.0).derivative()
        assert (d.a, d.b, d.c) == (-1.0, -6.0, -3.0)
        assert ExpLinear(0.0, 1.0, 0.0).derivative(2)(X).tolist() == [0.0] * len(X)


class TestChannelTestFlow:
    """Impermeable manufactured flow in a flat channel"""

    def test_at_rest_initially_and_impermeable(self):
        flow = channel_test_flow(2.0)
        X1, X2 = np.meshgrid(X, np.array([0.0, 2.0]), indexing="ij")
        assert np.allclose(flow.velocity(0.0, X1, X2)[0], 0.0)
        assert np.allclose(flow.velocity(0.7, X1, X2)[1], 0.0, atol=1e-13)

    def test_divergence_free(self):
        flow = channel_test_flow(1.5)
        X1, X2 = np.meshgrid(X, np.linspace(0.0, 1.5, 7), indexing="ij")
        div = flow.u1.derivative(d1=1)(0.4, X1, X2) + flow.u2.derivative(d2=1)(0.4, X1, X2)
        assert np.max(np.abs(div)) < 1e-12

    def test_vorticity_closed_form(self):
        flow = channel_test_flow(1.0)
        value = flow.vorticity(1.0, 0.25, 0.5)
        assert value == pytest.approx(5.0 * np.pi ** 2, rel=1e-12)

    def test_viscous_part_of_forcing(self):
        inviscid, viscous = channel_test_flow(1.0), channel_test_flow(1.0, nu=0.1)
        difference = viscous.force(1.0, 0.25, 0.0)[0] - inviscid.force(1.0, 0.25, 0.0)[0]
        assert difference == pytest.approx(0.9 * np.pi ** 3, rel=1e-12)

    def test_no_forcing_before_start(self):
        flow = channel_test_flow(1.0)
        f1, f2 = flow.force(-0.1, X, X)
        assert not np.any(f1) and not np.any(f2)
        assert not np.any(flow.curl(-0.1, X, X))
        assert not np.any(flow.wall_vorticity_source(0.5, X))


class TestRoughWallTestFlow:

    @pytest.fixture
    def flow(self, default_profile):
        wall = RoughWall(default_profile, 0.1, 1.0, 1.0)
        return rough_wall_test_flow(wall, nu=0.01, decay_length=0.5, friction=FourierSeries(mean_offset=1.0))

    def test_streamfunction_vanishes_on_wall(self, flow):
        h = flow.wall.height(X)[0]
        assert np.allclose(flow.streamfunction(0.8, X, h), 0.0, atol=1e-14)

    def test_no_flux_through_wall(self, flow):
        h, hx, _ = flow.wall.height(X)
        u1, u2 = flow.velocity(0.8, X, h)
        assert np.allclose(u2 - hx * u1, 0.0, atol=1e-12)

    def test_wall_source_combines_vorticity_and_slip(self, flow):
        h, hx, hxx = flow.wall.height(X)
        bracket = np.sqrt(1.0 + hx ** 2)
        u1, u2 = flow.velocity(0.8, X, h)
        slip = (u1 + hx * u2) / bracket
        expected = flow.vorticity(0.8, X, h) - (2.0 * hxx / bracket ** 3 - 1.0) * slip
        assert np.allclose(flow.wall_vorticity_source(0.8, X), expected, atol=1e-12)
