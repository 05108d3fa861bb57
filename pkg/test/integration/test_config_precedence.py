"""Integration tests for config precedence system."""

import json
from unittest.mock import patch

from click.testing import CliRunner

from cli.main import main
from src.manager.config_manager import load_config_with_full_precedence


class TestConfigPrecedence:
    """Test configuration precedence: defaults < file < env < cli."""

    def test_file_overrides_defaults(self, write_config):
        path = write_config({"n_agents": 5, "a_k": 0.5})
        with patch.dict('os.environ', {}, clear=True):
            config = load_config_with_full_precedence(path)
        assert config.n_agents == 5
        assert config.a_k == 0.5
        assert config.b_k == 0.1

    def test_env_config_path_used(self, write_config, tmp_path, monkeypatch):
        """Test that SEESAWTRACK_CONFIG_PATH selects the scenario file."""
        monkeypatch.chdir(tmp_path)
        path = write_config({"n_targets": 4}, "from_env.json")
        with patch.dict('os.environ', {'SEESAWTRACK_CONFIG_PATH': str(path)}, clear=True):
            config = load_config_with_full_precedence()
        assert config.n_targets == 4

    def test_full_chain(self, write_config):
        """Test every layer: file sets steps, env overrides seed, CLI overrides steps."""
        path = write_config({"n_steps": 10, "seed": 1})
        with patch.dict('os.environ', {'SEESAWTRACK_SEED': '2', 'SEESAWTRACK_N_STEPS': '20'},
                        clear=True):
            config = load_config_with_full_precedence(path, {"n_steps": 30})
        assert config.seed == 2
        assert config.n_steps == 30

    def test_cli_flags_beat_env_end_to_end(self, write_config, tmp_path, monkeypatch):
        """Test that --seed beats SEESAWTRACK_SEED in the written summary."""
        monkeypatch.chdir(tmp_path)
        path = write_config({"n_steps": 2}, "run.json")
        out = tmp_path / "out"
        with patch.dict('os.environ', {'SEESAWTRACK_SEED': '7'}, clear=True):
            result = CliRunner().invoke(main, ["--config", str(path), "--seed", "3", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert json.loads((out / "summary.json").read_text())["base_seed"] == 3

    def test_env_seed_used_without_flag(self, write_config, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        path = write_config({"n_steps": 2}, "run.json")
        out = tmp_path / "out"
        with patch.dict('os.environ', {'SEESAWTRACK_SEED': '7'}, clear=True):
            result = CliRunner().invoke(main, ["--config", str(path), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert json.loads((out / "summary.json").read_text())["base_seed"] == 7
