"""Integration tests for CLI functionality."""

import json
from unittest.mock import patch

import pytest
from click.testing import CliRunner

from cli.main import main
from src.serializer.results import SummarySerializer


@pytest.fixture
def runner(tmp_path, monkeypatch):
    """CliRunner in an empty working directory with no SEESAWTRACK_* variables."""
    monkeypatch.chdir(tmp_path)
    with patch.dict('os.environ', {}, clear=True):
        yield CliRunner()


class TestCLIConfigHandling:
    """Test CLI configuration loading and validation."""

    def test_runs_with_defaults_and_step_override(self, runner, tmp_path):
        """Should run the default scenario with --steps and write standard outputs."""
        result = runner.invoke(main, ["--steps", "3", "--out", str(tmp_path / "out")])

        assert result.exit_code == 0, result.output
        assert "Wrote 3 files" in result.output
        assert sorted(p.name for p in (tmp_path / "out").iterdir()) == [
            "metrics.csv", "summary.json", "trajectories.csv"]

    def test_loads_custom_config_file(self, runner, write_config, tmp_path):
        """Should take scenario fields from --config."""
        path = write_config({"n_agents": 3, "n_targets": 1, "n_steps": 2}, "custom.json")
        result = runner.invoke(main, ["--config", str(path), "--out", str(tmp_path / "out")])

        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["preset"] is None
        assert summary["variants"][0]["config"]["n_agents"] == 3

    def test_loads_default_scenario_file(self, runner, write_config, tmp_path):
        """Should pick up ./scenario.json without --config."""
        write_config({"n_steps": 2, "seed": 11})
        result = runner.invoke(main, ["--out", str(tmp_path / "out")])

        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["base_seed"] == 11

    def test_invalid_config_value_exits_1(self, runner, write_config):
        """Should report the offending field and exit 1."""
        path = write_config({"n_agents": -1}, "bad.json")
        result = runner.invoke(main, ["--config", str(path)])

        assert result.exit_code == 1
        assert "Configuration error: n_agents" in result.output

    def test_unknown_config_field_exits_1(self, runner, write_config):
        path = write_config({"n_agentz": 2}, "bad.json")
        result = runner.invoke(main, ["--config", str(path)])

        assert result.exit_code == 1
        assert "n_agentz: unknown configuration field" in result.output

    def test_missing_config_file_is_usage_error(self, runner):
        result = runner.invoke(main, ["--config", "missing.json"])
        assert result.exit_code == 2

    def test_unknown_preset_exits_2(self, runner):
        result = runner.invoke(main, ["--preset", "no-such-preset"])
        assert result.exit_code == 2

    def test_negative_seed_rejected(self, runner):
        result = runner.invoke(main, ["--seed", "-1"])
        assert result.exit_code == 2

    def test_help_lists_options(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for option in ("--config", "--preset", "--seed", "--reps", "--steps", "--out",
                       "--parallel", "--log-raw", "--verbose"):
            assert option in result.output


class TestCLIPresets:
    """Test running named presets from the CLI."""

    def test_fig_preset_writes_summary(self, runner, tmp_path):
        out = tmp_path / "fig"
        result = runner.invoke(main, ["--preset", "fig-2a2t", "--steps", "3", "--seed", "5",
                                      "--out", str(out)])

        assert result.exit_code == 0, result.output
        summary = SummarySerializer().deserialize((out / "summary.json").read_text())
        assert summary.preset == "fig-2a2t"
        assert summary.base_seed == 5
        assert summary.variant("A2").seeds == [5]

    def test_preset_with_reps(self, runner, tmp_path):
        out = tmp_path / "median"
        result = runner.invoke(main, ["--preset", "median-T2", "--steps", "2", "--reps", "2",
                                      "--out", str(out)])

        assert result.exit_code == 0, result.output
        header = (out / "metrics.csv").read_text().splitlines()[0]
        assert header == "k,m_k_A2,m_k_A5,m_k_A10,m_k_G5x2"

    def test_verbose_lists_written_files(self, runner, tmp_path):
        result = runner.invoke(main, ["--steps", "2", "--verbose", "--out", str(tmp_path / "out")])

        assert result.exit_code == 0, result.output
        assert "summary.json" in result.output

    def test_unwritable_output_exits_1(self, runner, tmp_path):
        """Should report an output path that is a file."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        result = runner.invoke(main, ["--steps", "2", "--out", str(blocker / "out")])

        assert result.exit_code == 1
        assert "Error:" in result.output


class TestCLIDeterminism:
    """Same seed, same bytes."""

    def _run(self, runner, out, *extra):
        result = runner.invoke(main, ["--preset", "fig-3a2t", "--steps", "4", "--seed", "2",
                                      "--reps", "2", "--out", str(out), *extra])
        assert result.exit_code == 0, result.output

    def test_csv_byte_identical_across_runs(self, runner, tmp_path):
        self._run(runner, tmp_path / "a")
        self._run(runner, tmp_path / "b")
        for name in ("trajectories.csv", "metrics.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_csv_byte_identical_across_parallelism(self, runner, tmp_path):
        self._run(runner, tmp_path / "serial", "--parallel", "1")
        self._run(runner, tmp_path / "parallel", "--parallel", "2")
        for name in ("trajectories.csv", "metrics.csv"):
            assert ((tmp_path / "serial" / name).read_bytes()
                    == (tmp_path / "parallel" / name).read_bytes())

    def test_log_raw_keeps_every_replication(self, runner, tmp_path):
        self._run(runner, tmp_path / "raw", "--log-raw")
        rows = (tmp_path / "raw" / "trajectories.csv").read_text().splitlines()[1:]
        assert {row.split(",")[1] for row in rows} == {"0", "1"}
