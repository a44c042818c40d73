from pathlib import Path

from sqlalchemy import inspect, text

from database.connection import database_url, get_db, get_engine, settings


class TestRunDatabase:
    """One SQLite file per output directory"""

    def test_url_points_into_output_dir(self, output_dir):
        url = database_url(output_dir)
        assert url.startswith("sqlite:///")
        assert url.endswith(f"runs/{settings.database_name}")
        assert Path(output_dir).is_dir()

    def test_tables_are_created(self, output_dir):
        tables = set(inspect(get_engine(output_dir)).get_table_names())
        assert {"sweep_records", "check_records"} <= tables

    def test_engine_is_cached_per_directory(self, output_dir, tmp_path):
        assert get_engine(output_dir) is get_engine(output_dir)
        assert get_engine(output_dir) is not get_engine(str(tmp_path / "other"))

    def test_session_executes(self, output_dir):
        db = next(get_db(output_dir))
        try:
            assert db.execute(text("SELECT 1")).scalar() == 1
        finally:
            db.close()


class TestInspection:

    def test_empty_database(self, output_dir, capsys):
        import inspect_runs
        assert inspect_runs.inspect_database(output_dir) == 0
        assert "No sweep records found" in capsys.readouterr().out

    def test_lists_studies_and_suites(self, output_dir, capsys):
        import inspect_runs
        from database.schemas import CheckResult, SweepResult
        from services.check_suites import persist_checks
        from services.sweep_engine import persist_results

        persist_results([SweepResult(epsilon=0.25, nu=1e-3, alpha=0.5, N=3, q_linf=0.5)], "demo", output_dir)
        persist_checks({"weight": [CheckResult(name="w", value=0.0, bound=0.0, passed=True),
                                   CheckResult(name="v", value=1.0, bound=0.0, passed=False)]}, output_dir)
        assert inspect_runs.inspect_database(output_dir) == 3
        out = capsys.readouterr().out
        assert "Study: demo" in out and "q_linf=5.000e-01" in out
        assert "❌ weight: 1/2 passed" in out
