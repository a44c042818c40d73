import pytest
import numpy as np

from services.diagnostics import (QUADRATURE_FLOOR, QUADRATURE_SAFETY, NormKind, WeightSpec, curl_trace_check,
                                  gradient_bound_m, gradient_curl_check, norm, rate_fit, rescaled_l2_scaling_check,
                                  stretch_identity_check, summarize, trace_constant, trace_inequality_check, weight_phi,
                                  weight_phi_derivative)
from services.geometry import RoughWall
from services.grids import WallGrid, flat_wall_grid
from utilities.errors import ArityError, ContractError, DecayViolationError

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def unit_grid():
    return flat_wall_grid(16, 1.0, 0.1, 16)


@pytest.fixture(scope="module")
def deep_grid():
    """Flat strip deep enough for exp(-5 x2) to decay"""
    return flat_wall_grid(16, 4.0, 0.1, 24)


def tangent_field(grid, decay):
    """grad^perp of cos(2 pi x1) x2 exp(-decay x2): divergence-free and tangent to the flat wall"""
    X1, X2 = grid.X1, grid.X2
    psi = np.cos(TWO_PI * X1) * X2 * np.exp(-decay * X2)
    return np.stack([-grid.d2(psi), grid.d1(psi)])


class TestWeights:
    """phi(z) = sqrt(nu~) int_0^{sqrt(m/nu~) z} exp(-s^2/2) ds"""

    def test_invalid_specs(self):
        with pytest.raises(ValueError, match="viscosity"):
            WeightSpec(nu_tilde=0.0)
        with pytest.raises(ValueError, match="at least 1"):
            WeightSpec(nu_tilde=1.0, m=0.5)

    def test_endpoints(self):
        spec = WeightSpec(nu_tilde=0.04, m=2.0)
        assert weight_phi(spec, 0.0) == 0.0
        assert weight_phi_derivative(spec, 0.0) == pytest.approx(np.sqrt(2.0))
        assert weight_phi(spec, 50.0) == pytest.approx(0.2 * np.sqrt(np.pi / 2.0), rel=1e-12)

    def test_derivative_matches_difference_quotient(self):
        spec = WeightSpec(nu_tilde=0.3, m=1.5)
        z, h = np.linspace(0.1, 2.0, 9), 1e-5
        quotient = (weight_phi(spec, z + h) - weight_phi(spec, z - h)) / (2.0 * h)
        assert np.allclose(quotient, weight_phi_derivative(spec, z), atol=1e-8)

    def test_negative_distance(self):
        with pytest.raises(ValueError):
            weight_phi(WeightSpec(nu_tilde=1.0), -0.1)


class TestNorms:

    def test_invalid_kinds(self):
        with pytest.raises(ValueError, match="unknown norm"):
            NormKind("H1")
        with pytest.raises(ValueError, match="gamma"):
            NormKind.weighted_exp(7.0)
        with pytest.raises(ValueError):
            NormKind.hs_eps_gamma(3, 0.5)

    def test_l2_and_linf(self, unit_grid):
        ones = np.ones((unit_grid.nx, unit_grid.ns))
        assert norm(ones, NormKind.l2(), unit_grid) == pytest.approx(1.0, rel=1e-12)
        assert norm(np.stack([ones, ones]), NormKind.l2(), unit_grid) == pytest.approx(np.sqrt(2.0), rel=1e-12)
        assert norm(-3.0 * ones, NormKind.linf(), unit_grid) == 3.0

    def test_weighted_norms_need_epsilon_and_weight(self, unit_grid):
        ones = np.ones((unit_grid.nx, unit_grid.ns))
        with pytest.raises(ContractError, match="epsilon"):
            norm(ones, NormKind.l2_phi(), unit_grid)
        with pytest.raises(ContractError, match="WeightSpec"):
            norm(ones, NormKind.l2_phi(), unit_grid, epsilon=0.1)

    def test_weighted_exp_with_zero_rate_is_l2(self, unit_grid):
        f = unit_grid.X2 * np.cos(TWO_PI * unit_grid.X1)
        assert norm(f, NormKind.weighted_exp(0.0), unit_grid, epsilon=0.1) == pytest.approx(
            norm(f, NormKind.l2(), unit_grid), rel=1e-14)

    def test_first_order_eps_norm(self, unit_grid):
        # |x2| + eps |d2 x2| on the unit strip
        value = norm(unit_grid.X2, NormKind.hs_eps_gamma(1, 0.0), unit_grid, epsilon=0.1)
        assert value == pytest.approx(np.sqrt(1.0 / 3.0) + 0.1, rel=1e-10)

    def test_phi_weight_vanishes_at_the_wall(self, unit_grid):
        near_wall = np.where(unit_grid.X2 < 1e-12, 1.0, 0.0)
        assert norm(near_wall, NormKind.l2_phi(), unit_grid, epsilon=0.1, weight=WeightSpec(0.5)) == 0.0


class TestTraceInequalities:

    def test_flat_constant(self, deep_grid):
        assert trace_constant(deep_grid) == pytest.approx(np.sqrt(2.0))

    def test_exponential_is_sharp(self, deep_grid):
        result = trace_inequality_check(np.exp(-5.0 * deep_grid.X2), deep_grid)
        assert result.passed
        assert result.value == pytest.approx(1.0, rel=1e-6)

    def test_slack_follows_quadrature_error(self, deep_grid):
        f = np.exp(-5.0 * deep_grid.X2)
        result = trace_inequality_check(f, deep_grid)
        gap = result.details["quadrature_error"]
        assert gap < 1e-6
        assert result.bound == pytest.approx(1.0 + max(QUADRATURE_FLOOR, QUADRATURE_SAFETY * gap), rel=1e-15)

        coarse = WallGrid.stretched(RoughWall.flat(), 16, 17, 4.0, 0.5)
        loose = trace_inequality_check(np.exp(-5.0 * coarse.X2), coarse)
        assert loose.details["quadrature_error"] > 1e3 * gap
        assert loose.bound - 1.0 > 1e3 * (result.bound - 1.0)

    def test_explicit_tolerance(self, deep_grid):
        result = curl_trace_check(tangent_field(deep_grid, 5.0), deep_grid, tol=0.5)
        assert result.bound == 1.5
        assert "quadrature_error" in result.details

    def test_coarse_rule_integrates_smooth_fields(self, deep_grid):
        f = np.exp(-5.0 * deep_grid.X2) * (1.0 + np.cos(TWO_PI * deep_grid.X1))
        exact = (1.0 - np.exp(-20.0)) / 5.0
        assert deep_grid.integrate(f) == pytest.approx(exact, rel=1e-12)
        assert deep_grid.integrate_coarse(f) == pytest.approx(exact, rel=1e-4)
        assert deep_grid.wall_integrate_coarse(f[:, 0]) == pytest.approx(1.0, rel=1e-12)

    def test_vanishing_trace_is_degenerate(self, deep_grid):
        result = trace_inequality_check(deep_grid.X2 * np.exp(-5.0 * deep_grid.X2), deep_grid)
        assert result.passed and result.degenerate

    def test_non_decaying_function(self, deep_grid):
        with pytest.raises(DecayViolationError):
            trace_inequality_check(np.ones((deep_grid.nx, deep_grid.ns)), deep_grid)

    def test_curl_trace_for_tangent_field(self, deep_grid):
        result = curl_trace_check(tangent_field(deep_grid, 5.0), deep_grid)
        assert result.passed and not result.degenerate
        assert 0.0 < result.value <= 1.0

    def test_normal_field_rejected(self, deep_grid):
        v = np.stack([np.zeros_like(deep_grid.X2), np.exp(-5.0 * deep_grid.X2)])
        with pytest.raises(ContractError):
            curl_trace_check(v, deep_grid)

    def test_gradient_equals_curl_on_flat_wall(self, deep_grid):
        result = gradient_curl_check(tangent_field(deep_grid, 5.0), deep_grid)
        assert result.details["constant"] == 0.0
        assert result.value == pytest.approx(1.0, abs=1e-6)

    def test_zero_field_is_degenerate(self, deep_grid):
        zero = np.zeros((2, deep_grid.nx, deep_grid.ns))
        assert curl_trace_check(zero, deep_grid).degenerate
        assert gradient_curl_check(zero, deep_grid).degenerate


class TestStretchIdentity:

    def test_identity_holds(self, deep_grid):
        v = tangent_field(deep_grid, 5.0)
        X1, X2 = deep_grid.X1, deep_grid.X2
        psi = np.sin(TWO_PI * X1) * X2 * np.exp(-3.0 * X2) + 0.5 * np.cos(2 * TWO_PI * X1) * X2 ** 2 * np.exp(-4.0 * X2)
        u = np.stack([-deep_grid.d2(psi), deep_grid.d1(psi)])
        result = stretch_identity_check(v, u, deep_grid)
        assert result.passed
        assert result.details["lhs"] == pytest.approx(result.details["rhs"], abs=1e-8)

    def test_zero_field(self, deep_grid):
        zero = np.zeros((2, deep_grid.nx, deep_grid.ns))
        assert stretch_identity_check(zero, zero, deep_grid).degenerate


class TestRates:

    def test_exact_power_law(self):
        slope, r2 = rate_fit([0.25, 0.125, 0.0625], [0.25 ** 1.5, 0.125 ** 1.5, 0.0625 ** 1.5])
        assert slope == pytest.approx(1.5)
        assert r2 == pytest.approx(1.0)

    def test_pairs_form(self):
        slope, _ = rate_fit([(0.5, 2.0), (0.25, 8.0), (0.125, 32.0)])
        assert slope == pytest.approx(-2.0)

    def test_invalid_inputs(self):
        with pytest.raises(ArityError):
            rate_fit([0.5, 0.25], [1.0, 2.0])
        with pytest.raises(ValueError, match="positive"):
            rate_fit([0.5, 0.25, 0.125], [1.0, 0.0, 2.0])
        with pytest.raises(ValueError, match="one value per"):
            rate_fit([0.5, 0.25, 0.125], [1.0, 2.0])

    def test_rescaled_profile_scales_like_sqrt_eps(self):
        result = rescaled_l2_scaling_check(lambda x1, z1, z2: np.exp(-TWO_PI * z2), 0.0, [0.25, 0.125, 0.0625],
                                           lambda eps: RoughWall.flat())
        assert result.passed
        assert result.value == pytest.approx(1.0, rel=1e-8)
        assert result.details["slope"] == pytest.approx(0.5, abs=1e-8)

    def test_weight_faster_than_decay(self):
        with pytest.raises(DecayViolationError):
            rescaled_l2_scaling_check(lambda x1, z1, z2: np.exp(-z2), 1.5, [0.5, 0.25, 0.125],
                                      lambda eps: RoughWall.flat(), decay_rate=1.0)


class TestGradientBound:

    def test_linear_shear(self, unit_grid):
        u = np.stack([unit_grid.X2, np.zeros_like(unit_grid.X2)])
        assert gradient_bound_m([u, 0.5 * u], unit_grid, 0.125) == pytest.approx(1.125, rel=1e-10)

    def test_summarize(self):
        from database.schemas import CheckResult
        ok = CheckResult(name="a", value=0.0, bound=1.0, passed=True)
        bad = CheckResult(name="b", value=2.0, bound=1.0, passed=False)
        assert summarize([ok]) and not summarize([ok, bad])
