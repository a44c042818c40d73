import json
from pathlib import Path

import pytest

import main
from commands.options import epsilon_index, parse_config
from database.schemas import SweepResult
from services import check_suites
from utilities import log
from utilities.errors import ConfigError
from utils.reporting import write_json

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


@pytest.fixture(autouse=True)
def quiet():
    yield
    log.set_verbose(False)


class TestOptions:

    def test_yaml_with_overrides(self):
        config = parse_config(str(CONFIGS / "default_study.yaml"), {"sweep.epsilons": [0.5, 0.25, 0.125],
                                                                    "order": 4})
        assert config.name == "default_study"
        assert config.friction.mean == -1.0
        assert config.sweep.epsilons == [0.5, 0.25, 0.125]
        assert config.order == 4

    def test_missing_and_malformed_files(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(str(tmp_path / "absent.yaml"))
        (tmp_path / "list.yaml").write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            parse_config(str(tmp_path / "list.yaml"))

    def test_epsilon_index(self, default_config):
        assert epsilon_index(default_config, None) == 0
        assert epsilon_index(default_config, 0.0625) == 2
        with pytest.raises(ConfigError):
            epsilon_index(default_config, 0.5)


@pytest.mark.cli
class TestMain:
    """Exit codes: 0 all passed, 1 failure, 2 bad configuration"""

    def test_bad_configuration_exits_2(self, tmp_path, capsys):
        assert main.main(["check", "--suite", "weight", "--epsilons", "0.3", "--output-dir", str(tmp_path)]) == 2
        assert "1/ε must be an integer" in capsys.readouterr().err

    def test_weight_suite_passes(self, tmp_path, capsys):
        assert main.main(["check", "--suite", "weight", "--name", "w", "--output-dir", str(tmp_path)]) == 0
        assert "✅ 36/36 checks passed" in capsys.readouterr().out
        stored = json.loads((tmp_path / "w_checks.json").read_text())
        assert list(stored) == ["weight"] and len(stored["weight"]) == 36
        assert (tmp_path / "runs.db").exists()

    def test_no_store(self, tmp_path):
        assert main.main(["check", "--suite", "weight", "--no-store", "--output-dir", str(tmp_path)]) == 0
        assert not list(tmp_path.iterdir())

    def test_failing_check_exits_1(self, tmp_path, monkeypatch, capsys):
        def failing(config, rng):
            return [check_suites.CheckResult(name="weight.bad", value=2.0, bound=1.0, passed=False)]

        monkeypatch.setitem(check_suites.SUITES, "weight", (failing, False))
        assert main.main(["check", "--suite", "weight", "--no-store", "--output-dir", str(tmp_path)]) == 1
        assert "❌ weight.bad" in capsys.readouterr().out

    def test_report_from_json(self, tmp_path):
        records = [SweepResult(epsilon=eps, nu=1e-3, alpha=0.5, N=3, q_linf=eps) for eps in (0.25, 0.125)]
        source = write_json(records, tmp_path / "in.json")
        out = tmp_path / "out"
        assert main.main(["report", "--from-json", str(source), "--formats", "csv", "--stem", "again",
                          "--output-dir", str(out)]) == 0
        assert (out / "again.csv").read_text().count("\n") == 3

    def test_unreadable_input_exits_1(self, tmp_path, capsys):
        assert main.main(["report", "--from-json", str(tmp_path / "absent.json"), "--output-dir", str(tmp_path)]) == 1
        assert "[ERROR] report failed" in capsys.readouterr().err
