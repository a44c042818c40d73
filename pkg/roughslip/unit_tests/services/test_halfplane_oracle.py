import pytest
import numpy as np

from services.halfplane_oracle import (ModeFunction, green_dirichlet, neumann_flat_mode, poisson_dirichlet_mode,
                                       poisson_dirichlet_zero_mode)
from utilities.errors import CompatibilityError, ContractError, DecayViolationError

Z = np.array([0.0, 0.3, 1.0, 2.5, 6.0])


@pytest.fixture
def exp_source():
    return ModeFunction(1.0, lambda y: np.exp(-y))


class TestGreenFunction:

    def test_closed_form_and_symmetry(self):
        assert green_dirichlet(1.0, 1.0, 2.0) == pytest.approx(-np.exp(-2.0) * np.sinh(1.0), rel=1e-14)
        assert green_dirichlet(3.0, 0.4, 1.1) == pytest.approx(green_dirichlet(-3.0, 1.1, 0.4), rel=1e-14)
        assert green_dirichlet(2.0, 0.0, 5.0) == 0.0

    def test_no_overflow_far_from_wall(self):
        assert np.isfinite(green_dirichlet(50.0, 400.0, 401.0))

    def test_zero_wavenumber_rejected(self):
        with pytest.raises(ContractError):
            green_dirichlet(0.0, 1.0, 1.0)


class TestDirichletModes:
    """(d^2 - k^2) psi = F with psi(0) = 0"""

    def test_nonzero_mode(self, exp_source):
        psi = poisson_dirichlet_mode(2.0, exp_source)
        expected = -(np.exp(-Z) - np.exp(-2.0 * Z)) / 3.0
        assert np.allclose(psi(Z), expected, atol=1e-10)

    def test_zero_mode_and_far_field(self, exp_source):
        psi, q0 = poisson_dirichlet_zero_mode(exp_source)
        assert np.allclose(psi(Z), np.exp(-Z) - 1.0, atol=1e-10)
        assert q0 == pytest.approx(-1.0, abs=1e-10)

    def test_slowly_decaying_source_rejected(self):
        flat = ModeFunction(1.0, lambda y: 1.0 / (1.0 + y))
        with pytest.raises(DecayViolationError) as info:
            poisson_dirichlet_mode(1.0, flat)
        assert info.value.tail_ratio > 1e-8


class TestNeumannModes:
    """psi'(0) = g"""

    def test_homogeneous(self):
        psi = neumann_flat_mode(2.0, 1.0)
        assert np.allclose(psi(Z), -0.5 * np.exp(-2.0 * Z), atol=1e-14)

    def test_with_source(self, exp_source):
        g = 0.7
        psi = neumann_flat_mode(2.0, g, exp_source)
        particular = -(np.exp(-Z) - np.exp(-2.0 * Z)) / 3.0
        expected = -(1.0 / 3.0 + g) / 2.0 * np.exp(-2.0 * Z) + particular
        assert np.allclose(psi(Z), expected, atol=1e-10)

    def test_compatible_zero_mode(self, exp_source):
        psi0 = neumann_flat_mode(0.0, -1.0, exp_source)
        assert np.allclose(psi0(Z), np.exp(-Z), atol=1e-10)

    def test_incompatible_zero_mode(self, exp_source):
        with pytest.raises(CompatibilityError) as info:
            neumann_flat_mode(0.0, 0.0, exp_source)
        assert info.value.mismatch == pytest.approx(1.0, abs=1e-10)

    def test_zero_mode_without_source_needs_zero_flux(self):
        assert np.all(neumann_flat_mode(0.0, 0.0)(Z) == 0.0)
        with pytest.raises(CompatibilityError):
            neumann_flat_mode(0.0, 0.5)
