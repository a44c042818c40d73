import json

import pytest

from utilities import log
from utilities.errors import (CFLViolationError, CompatibilityError, ConfigError, DecayViolationError,
                              InternalConsistencyError, RoughSlipError, SolverConvergenceError)


class TestErrors:

    def test_input_errors_are_value_errors(self):
        assert issubclass(ConfigError, ValueError)
        assert issubclass(CompatibilityError, ValueError)
        assert not issubclass(InternalConsistencyError, ValueError)

    def test_config_error_keeps_locations(self):
        err = ConfigError("invalid configuration", ["sweep.epsilons"])
        assert err.locations == ["sweep.epsilons"]
        assert isinstance(err, RoughSlipError)

    def test_numeric_payloads(self):
        assert CompatibilityError("Neumann data", 0.25).mismatch == 0.25
        assert "mismatch 2.500e-01" in str(CompatibilityError("Neumann data", 0.25))
        assert CFLViolationError("step too large", 1.7).cfl == 1.7
        err = SolverConvergenceError("wall iteration", 40, 1e-3)
        assert (err.iterations, err.residual) == (40, 1e-3)
        assert "40 iterations" in str(err)

    def test_decay_ratio_defaults_to_nan(self):
        assert DecayViolationError("slow decay").tail_ratio != DecayViolationError("slow decay").tail_ratio


class TestLog:

    @pytest.fixture(autouse=True)
    def quiet(self):
        log.set_verbose(False)
        yield
        log.set_verbose(False)

    def test_status_markers(self, capsys):
        log.status("oracle checks passed")
        log.status("trace check failed", ok=False)
        out = capsys.readouterr().out.splitlines()
        assert out == ["✅ oracle checks passed", "❌ trace check failed"]

    def test_debug_only_when_verbose(self, capsys):
        log.debug("hidden")
        assert capsys.readouterr().err == ""
        log.set_verbose(True)
        assert log.is_verbose()
        log.debug("shown")
        assert capsys.readouterr().err == "[DEBUG] shown\n"

    def test_error_goes_to_stderr(self, capsys):
        log.error("bad config")
        captured = capsys.readouterr()
        assert captured.out == "" and captured.err == "[ERROR] bad config\n"

    def test_progress_is_one_json_object(self, capsys):
        log.progress({"t": 0.5, "energy": 1.25, "step": 10})
        line = capsys.readouterr().out
        assert line.endswith("\n") and line.count("\n") == 1
        assert json.loads(line) == {"energy": 1.25, "step": 10, "t": 0.5}
