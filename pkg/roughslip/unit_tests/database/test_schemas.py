import pytest

from database.schemas import CheckResult, RunConfig, SweepResult, load_run_config
from utilities.errors import ConfigError


class TestRunConfigDefaults:

    def test_empty_mapping_gives_defaults(self, default_config):
        assert default_config.n0 == 2
        assert default_config.order == 3
        assert default_config.sweep.epsilons == [0.25, 0.125, 0.0625]
        assert default_config.sweep.nu_exponent == 7.0
        assert default_config.report.formats == ["csv", "json"]
        assert not default_config.report.include_runtimes

    def test_none_is_accepted(self):
        assert load_run_config(None) == RunConfig()

    def test_default_viscosity(self, default_config):
        assert default_config.sweep.viscosity(1) == pytest.approx(100.0 * 0.125 ** 7)

    def test_explicit_viscosities(self):
        config = load_run_config({"sweep": {"epsilons": [0.5, 0.25, 0.125], "nus": [1e-2, 1e-3, 1e-4]}})
        assert config.sweep.viscosity(2) == 1e-4


class TestRunConfigValidation:
    """Every failing location ends up in one ConfigError"""

    def test_non_dyadic_epsilon(self):
        with pytest.raises(ConfigError, match="1/ε must be an integer"):
            load_run_config({"sweep": {"epsilons": [0.25, 0.3, 0.125]}})

    def test_epsilon_out_of_range(self):
        with pytest.raises(ConfigError, match=r"\(0, 1\)"):
            load_run_config({"sweep": {"epsilons": [1.0]}})

    def test_nonpositive_profile(self):
        with pytest.raises(ConfigError, match="must be positive"):
            load_run_config({"profile": {"mean": 0.5, "modes": [{"j": 1, "re": 0.5}]}})

    def test_mismatched_viscosities(self):
        with pytest.raises(ConfigError, match="one viscosity per epsilon"):
            load_run_config({"sweep": {"nus": [1e-3]}})

    def test_all_locations_are_listed(self):
        with pytest.raises(ConfigError) as info:
            load_run_config({"n0": 0, "order": -1, "horizon": 0.0})
        locations = info.value.locations
        assert len(locations) == 3
        assert locations[0] == "n0: must be a positive integer"
        assert any(loc.startswith("horizon") for loc in locations)

    def test_forcing_must_start_quietly(self):
        with pytest.raises(ConfigError, match="ramp power"):
            load_run_config({"forcing": {"modes": [{"ramp_power": 0}]}})

    def test_zero_wavenumber_mode(self):
        with pytest.raises(ConfigError, match="mean offset"):
            load_run_config({"friction": {"modes": [{"j": 0, "re": 1.0}]}})

    def test_config_error_is_a_value_error(self):
        with pytest.raises(ValueError):
            load_run_config({"name": None})


class TestResults:

    def test_check_result_defaults(self):
        result = CheckResult(name="weight.zero", value=0.0, bound=0.0, passed=True)
        assert not result.degenerate
        assert result.details == {}

    def test_sweep_result_status(self):
        with pytest.raises(ValueError):
            SweepResult(epsilon=0.25, nu=1e-3, alpha=0.5, N=3, status="crashed")
        assert SweepResult(epsilon=0.25, nu=1e-3, alpha=0.5, N=3).resolution == "unresolved"
