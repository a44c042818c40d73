from types import SimpleNamespace

import pytest
import numpy as np

from database.schemas import SweepResult, load_run_config
from services import sweep_engine
from services.euler_cascade import ForcingSpec
from services.grids import flat_wall_grid
from services.sweep_engine import (PairTask, compare_with_approximation, diagnostics_grid, domain_for,
                                   friction_from_config, load_results, ns_config_for, persist_results,
                                   profile_from_config, run_pair, sweep, sweep_tasks)


class TestBuilders:

    def test_profile_and_friction(self, default_config):
        profile = profile_from_config(default_config)
        assert profile.mean_offset == 2.0
        assert profile.infimum() == pytest.approx(1.0)
        assert friction_from_config(default_config) is None
        friction = friction_from_config(load_run_config({"friction": {"mean": 1.0}}))
        assert friction.c2_norm() == pytest.approx(1.0)

    def test_ns_config_carries_numerics(self, small_config):
        domain = domain_for(small_config, 0.125)
        config = ns_config_for(small_config, domain, 1e-5)
        assert config.ns == 49 and config.min_x1_points == 32
        assert config.horizon == 0.2 and config.progress_every == 0
        assert isinstance(config.forcing, ForcingSpec) and len(config.forcing.modes) == 1

    def test_diagnostics_grid_resolves_eps(self, default_config):
        grid = diagnostics_grid(default_config, domain_for(default_config, 0.0625))
        assert grid.nx == 256
        assert grid.kind == "spectral"

    def test_tasks_follow_the_sweep(self, default_config):
        tasks = sweep_tasks(default_config, base=None, run_ns=False)
        assert [t.position for t in tasks] == [0, 1, 2]
        assert tasks[2].nu == pytest.approx(100.0 * 0.0625 ** 7)
        assert not any(t.run_ns for t in tasks)


class TestPairs:

    def test_failed_pair_is_recorded(self, default_config, monkeypatch):
        def broken(*args, **kwargs):
            raise RuntimeError("cell solve diverged")

        monkeypatch.setattr(sweep_engine, "solve_cascade", broken)
        result = run_pair(PairTask(position=0, config=default_config, epsilon=0.25, nu=1e-3, base=None))
        assert result.status == "failed"
        assert result.error == "pair failed: cell solve diverged"
        assert result.alpha == 0.5 and result.N == 3
        assert result.runtime_s >= 0.0

    def test_serial_sweep_keeps_order(self, default_config, monkeypatch):
        monkeypatch.setattr(sweep_engine, "run_pair",
                            lambda task: SweepResult(epsilon=task.epsilon, nu=task.nu, alpha=0.5, N=3))
        results = sweep(default_config, base=object(), workers=1)
        assert [r.epsilon for r in results] == [0.25, 0.125, 0.0625]

    def test_distance_to_the_euler_flow(self):
        grid = flat_wall_grid(8, 1.0, 0.25, 8)
        u = np.stack([np.ones_like(grid.X2), np.zeros_like(grid.X2)])
        zero_field = SimpleNamespace(evaluate=lambda t, x1, x2: np.zeros_like(x2))
        bundle = SimpleNamespace(velocity=lambda t, x1, x2: u, vorticity=zero_field,
                                 base_velocity=lambda t, x1, x2: np.zeros_like(u))
        run = SimpleNamespace(grid=grid, snapshots={0.5: SimpleNamespace(u=u, omega=np.zeros_like(grid.X2))})
        out = compare_with_approximation(bundle, run, 0.25)
        assert out["q_linf"] == 0.0 and out["q_l2_scaled"] == 0.0
        assert out["limit_linf"] == 1.0
        assert out["limit_l2"] == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.slow
    def test_approximation_only_pair(self, small_config):
        base = sweep_engine.base_flow(small_config)
        result = run_pair(PairTask(position=0, config=small_config, epsilon=0.25, nu=1e-3, base=base,
                                   run_ns=False))
        assert result.status == "ok", result.error
        assert result.layer_linf > 0.0
        assert result.q_linf is None


class TestPersistence:

    def test_round_trip_replaces_the_study(self, output_dir):
        first = [SweepResult(epsilon=eps, nu=1e-3, alpha=0.5, N=3, q_linf=eps) for eps in (0.25, 0.125)]
        assert persist_results(first, "s", output_dir) == 2
        second = [SweepResult(epsilon=0.0625, nu=1e-4, alpha=0.5, N=3, status="failed", error="boom")]
        persist_results(second, "s", output_dir)
        persist_results(first, "other", output_dir)
        loaded = load_results("s", output_dir)
        assert len(loaded) == 1 and loaded[0].status == "failed" and loaded[0].error == "boom"
        assert [r.q_linf for r in load_results("other", output_dir)] == [0.25, 0.125]
        assert load_results("missing", output_dir) == []
