"""Unit tests for ConfigManager."""

import tempfile
from pathlib import Path

import pytest

from mradon.errors import FormatError
from mradon.models import ExperimentConfig
from mradon.services import ConfigManager


@pytest.fixture(autouse=True)
def no_thread_env(monkeypatch):
    """Keep MR_THREADS from the outer environment out of the tests."""
    monkeypatch.delenv(ConfigManager.THREADS_ENV, raising=False)


class TestConfigManager:
    """Test suite for ConfigManager class."""

    def test_defaults_without_file(self):
        """Test that no config path yields the class defaults."""
        config = ConfigManager().load_config()

        assert isinstance(config, ExperimentConfig)
        assert config.seed == ConfigManager.DEFAULT_SEED
        assert config.threads == ConfigManager.DEFAULT_THREADS
        assert config.max_degree == ConfigManager.DEFAULT_MAX_DEGREE
        assert config.wigner_max_degree == ConfigManager.DEFAULT_WIGNER_MAX_DEGREE
        assert config.output_directory == ConfigManager.DEFAULT_OUTPUT_DIR
        assert config.tolerances == ConfigManager.DEFAULT_TOLERANCES

    def test_load_config_with_valid_file(self):
        """Test loading configuration from a key=value file."""
        with tempfile.TemporaryDirectory() as tmpdir:
            config_path = Path(tmpdir) / "mradon.conf"
            config_path.write_text(
                "# experiment defaults\n"
                "seed = 7\n"
                "threads = 4\n"
                "max_degree = 256  # smaller cap\n"
                "output_directory = /custom/output\n"
                "tolerance.moment = 1e-8\n"
            )

            config = ConfigManager(config_path).load_config()

            assert config.seed == 7
            assert config.threads == 4
            assert config.max_degree == 256
            assert config.output_directory == Path("/custom/output")
            assert config.tolerances["moment"] == 1e-8
            assert config.tolerances["parity"] == ConfigManager.DEFAULT_TOLERANCES["parity"]
            assert config.grid_factor == ConfigManager.DEFAULT_GRID_FACTOR

    def test_missing_file_raises(self):
        """Test that a configured but missing file is an error."""
        with tempfile.TemporaryDirectory() as tmpdir:
            manager = ConfigManager(Path(tmpdir) / "absent.conf")

            with pytest.raises(FileNotFoundError):
                manager.load_config()

    def test_unknown_key_raises(self):
        """Test that unknown keys are reported with their line."""
        with tempfile.TemporaryDirectory() as tmpdir:
            config_path = Path(tmpdir) / "mradon.conf"
            config_path.write_text("seed = 1\ncolour = blue\n")

            with pytest.raises(FormatError, match="line 2") as excinfo:
                ConfigManager(config_path).load_config()

            assert excinfo.value.line_number == 2

    def test_bad_value_raises(self):
        """Test that non-numeric values are rejected."""
        with tempfile.TemporaryDirectory() as tmpdir:
            config_path = Path(tmpdir) / "mradon.conf"
            config_path.write_text("threads = many\n")

            with pytest.raises(FormatError, match="Bad value"):
                ConfigManager(config_path).load_config()

    def test_line_without_equals_raises(self):
        """Test that a line must be key=value."""
        with tempfile.TemporaryDirectory() as tmpdir:
            config_path = Path(tmpdir) / "mradon.conf"
            config_path.write_text("seed 1\n")

            with pytest.raises(FormatError, match="key=value"):
                ConfigManager(config_path).load_config()

    def test_environment_threads(self, monkeypatch):
        """Test that MR_THREADS overrides the file."""
        monkeypatch.setenv(ConfigManager.THREADS_ENV, "3")

        assert ConfigManager().load_config().threads == 3

    def test_bad_environment_threads_ignored(self, monkeypatch):
        """Test that a non-integer MR_THREADS falls back to the default."""
        monkeypatch.setenv(ConfigManager.THREADS_ENV, "lots")

        assert ConfigManager().load_config().threads == ConfigManager.DEFAULT_THREADS

    def test_overrides_win(self, monkeypatch):
        """Test that explicit overrides beat the environment; None is ignored."""
        monkeypatch.setenv(ConfigManager.THREADS_ENV, "3")

        config = ConfigManager().load_config({"threads": 8, "seed": None, "tolerances": {"parity": 1e-6}})

        assert config.threads == 8
        assert config.seed == ConfigManager.DEFAULT_SEED
        assert config.tolerances["parity"] == 1e-6

    def test_unknown_override_raises(self):
        """Test that overrides must name known fields."""
        with pytest.raises(KeyError):
            ConfigManager().load_config({"colour": "blue"})

    def test_save_and_reload(self):
        """Test that a saved configuration loads back unchanged."""
        with tempfile.TemporaryDirectory() as tmpdir:
            config_path = Path(tmpdir) / "nested" / "mradon.conf"
            manager = ConfigManager(config_path)
            original = manager.load_config({"seed": 11, "grid_factor": 5.5, "tolerances": {"moment": 1e-9}})

            manager.save_config(original)
            loaded = manager.load_config()

            assert loaded.seed == 11
            assert loaded.grid_factor == 5.5
            assert loaded.tolerances == original.tolerances
            assert loaded.output_directory == original.output_directory

    def test_save_without_path_raises(self):
        """Test that saving needs a config path."""
        with pytest.raises(ValueError):
            ConfigManager().save_config(ExperimentConfig())
