import json

import pytest
import numpy as np

from services.euler_cascade import ForcingMode, ForcingSpec
from services.geometry import DomainParams, FourierSeries, RoughProfile, RoughWall
from services.grids import flat_wall_grid
from services.ns_solver import (NSConfig, NSSolver, init_state, laplacian_matrix, regime_flags, resolution_tag, run,
                                step, vorticity_bc_equivalence_check)
from utilities.errors import ContractError
from utils.field_storage import read_header

UNIFORM_PUSH = ForcingSpec((ForcingMode(component=1, wavenumber=0, profile="uniform", ramp_power=2),))


def flat_config(forcing, horizon=0.5, **overrides):
    options = dict(nu=0.01, forcing=forcing, horizon=horizon, wall=RoughWall.flat(), height=1.0, nx=16, ns=17,
                   layer_thickness=0.3, dt=0.01)
    options.update(overrides)
    return NSConfig(**options)


class TestNSConfig:

    def test_invalid_setup(self):
        with pytest.raises(ValueError, match="viscosity"):
            NSConfig(nu=0.0, forcing=UNIFORM_PUSH, horizon=1.0, wall=RoughWall.flat())
        with pytest.raises(ContractError):
            NSConfig(nu=1e-3, forcing=UNIFORM_PUSH, horizon=1.0)

    def test_derived_numerics(self, domain):
        config = NSConfig(nu=1e-4, forcing=UNIFORM_PUSH, horizon=1.0, domain=domain, min_x1_points=8)
        assert config.layer == pytest.approx(3.0 * np.sqrt(1e-4 * 0.125))
        assert config.x1_points == 64
        steps = 1.0 / config.time_step
        assert config.time_step <= 0.4 / 64 * (1.0 + 1e-12)
        assert steps == pytest.approx(round(steps))
        assert config.rough_wall.height_scale == pytest.approx(0.125 ** 1.5)

    def test_regime_flags(self, domain):
        inside = NSConfig(nu=1e3 * 0.125 ** 7, forcing=UNIFORM_PUSH, horizon=1.0, domain=domain,
                          friction=FourierSeries(mean_offset=1.0))
        assert regime_flags(inside) == {"nu_window": True, "friction_window": True, "theorem": True}
        outside = NSConfig(nu=1e-2, forcing=UNIFORM_PUSH, horizon=1.0, domain=domain,
                           friction=FourierSeries(mean_offset=10.0))
        assert regime_flags(outside) == {"nu_window": False, "friction_window": False, "theorem": False}
        assert not regime_flags(flat_config(UNIFORM_PUSH))["theorem"]

    def test_coarse_grid_is_extrapolated(self, default_profile):
        domain = DomainParams(epsilon=0.25, n0=2, profile=default_profile)
        config = NSConfig(nu=1e-6, forcing=UNIFORM_PUSH, horizon=1.0, domain=domain, nx=16, ns=17)
        assert resolution_tag(config.build_grid(), config.nu, 0.25) == "extrapolated"


class TestOperators:

    def test_laplacian_of_quadratic(self):
        grid = flat_wall_grid(8, 1.0, 0.1, 8)
        lap = laplacian_matrix(grid)
        f = grid.X2 ** 2 + np.cos(2.0 * np.pi * grid.X1)
        expected = 2.0 - 4.0 * np.pi ** 2 * np.cos(2.0 * np.pi * grid.X1)
        assert np.allclose((lap @ f.ravel()).reshape(f.shape), expected, atol=1e-9)

    def test_slip_condition_forms_agree_on_flat_wall(self):
        grid = flat_wall_grid(8, 1.0, 0.1, 8)
        u = np.stack([1.0 + 2.0 * grid.X2, np.zeros_like(grid.X2)])
        omega = -2.0 * np.ones_like(grid.X2)
        result = vorticity_bc_equivalence_check(u, omega, grid, friction=2.0)
        assert result["stress_residual"] == pytest.approx(0.0, abs=1e-10)
        assert result["vorticity_residual"] == pytest.approx(0.0, abs=1e-10)
        assert result["difference"] == pytest.approx(0.0, abs=1e-10)

    def test_friction_series_is_sampled(self):
        grid = flat_wall_grid(8, 1.0, 0.1, 8)
        u = np.stack([np.ones_like(grid.X2), np.zeros_like(grid.X2)])
        result = vorticity_bc_equivalence_check(u, np.zeros_like(grid.X2), grid, FourierSeries(mean_offset=0.5))
        assert result["stress_residual"] == pytest.approx(0.5, abs=1e-10)


class TestStepping:
    """Crank-Nicolson steps on a flat strip"""

    def test_rest_stays_at_rest(self):
        config = flat_config(ForcingSpec(modes=()))
        state = init_state(config)
        advanced = step(state, config)
        assert advanced.t == pytest.approx(0.01)
        assert advanced.step == 1
        assert not np.any(advanced.omega) and not np.any(advanced.u)

    def test_uniform_push_accelerates_plug_flow(self):
        result = run(flat_config(UNIFORM_PUSH))
        u1 = result.final.u[0]
        assert np.allclose(u1, 0.5 ** 3 / 3.0, rtol=1e-3)
        assert np.allclose(result.final.u[1], 0.0, atol=1e-12)
        assert result.energy_drift < 5e-3
        assert len(result.series) == 51
        assert {"t", "energy", "ledger", "wall_bc_defect", "flux"} <= set(result.series.columns)
        assert result.resolution in ("resolved", "extrapolated")

    def test_energy_matches_plug_flow(self):
        solver = NSSolver(flat_config(UNIFORM_PUSH, horizon=0.2))
        state = init_state(solver.config, solver.grid)
        for _ in range(20):
            state = solver.step(state)
        U = state.top_velocity
        assert solver.energy(state) == pytest.approx(0.5 * U ** 2, rel=1e-10)
        assert solver.wall_defect(state) == pytest.approx(0.0, abs=1e-12)

    def test_snapshots_progress_and_checkpoints(self, tmp_path, capsys):
        config = flat_config(UNIFORM_PUSH, horizon=0.2, progress_every=10, checkpoint_every=10,
                             checkpoint_dir=str(tmp_path))
        result = run(config, snapshot_times=[0.1])
        assert result.snapshots[0.1].t == pytest.approx(0.1)
        lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert [round(line["t"], 6) for line in lines] == [0.1, 0.2]
        assert read_header(tmp_path / "omega_000020.bin")["name"] == "omega"
        assert (tmp_path / "psi_000010.bin").exists()

    def test_empty_run_has_no_drift(self):
        result = run(flat_config(ForcingSpec(modes=()), horizon=0.05))
        assert result.energy_drift == 0.0
        assert result.regime == {"nu_window": False, "friction_window": False, "theorem": False}


class TestFrictionEnergy:
    """Navier friction with lambda >= 0 on a rough wall"""

    @pytest.fixture(scope="class")
    def released(self):
        # uniform push for t <= 0.1, then free decay
        push = ForcingSpec((ForcingMode(component=1, wavenumber=0, profile="uniform", ramp_power=0),),
                           switch_off=0.1)
        wall = RoughWall(RoughProfile.default(), 0.02, 0.25, 1.0)
        config = NSConfig(nu=0.01, forcing=push, horizon=0.4, wall=wall, friction=FourierSeries(mean_offset=1.0),
                          height=1.0, nx=32, ns=33, layer_thickness=0.3, sponge_strength=0.0, dt=0.005)
        return run(config)

    def test_energy_does_not_grow_after_switch_off(self, released):
        series = released.series
        free = series[series["t"] > 0.1 + 1e-12]["energy"].to_numpy()
        scale = float(series["energy"].max())
        assert scale > 0.0
        assert np.all(np.diff(free) <= 1e-9 * scale)
        assert free[-1] < free[0]

    def test_friction_power_is_dissipative(self, released):
        assert (released.series["friction"] <= 0.0).all()
        assert released.series["friction"].min() < 0.0

    def test_ledger_follows_energy(self, released):
        assert released.energy_drift < 0.02
        assert released.final.wall_slip.shape == (32,)
