"""
Unit tests for metastable/config.py - Configuration loading and validation.

Tests cover:
- Loading configuration from YAML file
- Environment variable override
- Configuration validation
- Default value handling
- Command-line overrides
"""
import os
from pathlib import Path
from typing import Any, Dict

import pytest
import yaml

from metastable.config import DEFAULT_CONFIG, apply_overrides, load_config, validate_config

pytestmark = pytest.mark.unit


class TestConfigLoader:
    """Test configuration loading from YAML and environment variables."""

    def test_load_default_config(self, clean_env):
        """Test loading configuration with default values."""
        config = load_config()
        assert config == DEFAULT_CONFIG
        assert config is not DEFAULT_CONFIG

    def test_load_from_yaml(self, clean_env, test_config: Dict[str, Any]):
        """Test that YAML values replace defaults and the rest is kept."""
        assert test_config["analysis"]["state_cap"] == 100000
        assert test_config["verification"]["trajectories"] == 20000
        assert test_config["verification"]["seed"] == 7
        assert test_config["runtime"]["log_level"] == "WARNING"
        # untouched keys keep their defaults
        assert test_config["verification"]["mc_sigmas"] == 3.0
        assert test_config["kawasaki"]["enumeration_cap"] == 10_000_000

    def test_env_var_override(self, clean_env, test_data_dir: Path):
        """Test that environment variables override config file values."""
        os.environ["METASTABLE_SEED"] = "42"
        os.environ["METASTABLE_JOBS"] = "3"
        os.environ["METASTABLE_LOG_LEVEL"] = "debug"
        config = load_config(str(test_data_dir / "test_config.yaml"))
        assert config["verification"]["seed"] == 42
        assert config["runtime"]["jobs"] == 3
        assert config["runtime"]["log_level"] == "DEBUG"

    def test_invalid_env_value_ignored(self, clean_env):
        """Test that an unparsable environment value keeps the default."""
        os.environ["METASTABLE_STATE_CAP"] = "many"
        assert load_config()["analysis"]["state_cap"] == DEFAULT_CONFIG["analysis"]["state_cap"]

    def test_missing_file(self, tmp_path: Path):
        """Test that a missing config file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_config(str(tmp_path / "nope.yaml"))

    def test_malformed_yaml(self, tmp_path: Path):
        """Test that malformed YAML raises yaml.YAMLError."""
        path = tmp_path / "bad.yaml"
        path.write_text("analysis: [unclosed\n", encoding="utf-8")
        with pytest.raises(yaml.YAMLError):
            load_config(str(path))

    def test_non_mapping(self, tmp_path: Path):
        """Test that a YAML list at the top level is rejected."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_config(str(path))

    def test_empty_file(self, clean_env, tmp_path: Path):
        """Test that an empty file gives the defaults."""
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")
        assert load_config(str(path)) == DEFAULT_CONFIG


class TestConfigValidation:
    """Test validate_config."""

    @pytest.mark.parametrize("section,key,value", [
        ("analysis", "state_cap", 0),
        ("analysis", "float_residual", 0.0),
        ("kawasaki", "K", -5),
        ("verification", "beta_grid", []),
        ("verification", "beta_grid", [5.0, -1.0]),
        ("verification", "exit_tolerance", 0),
        ("verification", "batch_size", 0),
        ("verification", "seed", -1),
        ("runtime", "jobs", 0),
        ("runtime", "log_level", "LOUD"),
    ])
    def test_invalid_values(self, section, key, value):
        """Test that out-of-range values raise ValueError."""
        config = load_config()
        config[section][key] = value
        with pytest.raises(ValueError):
            validate_config(config)

    def test_missing_section(self):
        """Test that a missing section raises ValueError."""
        config = load_config()
        del config["runtime"]
        with pytest.raises(ValueError, match="runtime"):
            validate_config(config)


class TestConfigOverrides:
    """Test apply_overrides."""

    def test_none_values_skipped(self, clean_env):
        """Test that unset flags keep the loaded values."""
        config = load_config()
        merged = apply_overrides(config, {"verification": {"seed": None, "trajectories": 500}})
        assert merged["verification"]["seed"] == 0
        assert merged["verification"]["trajectories"] == 500
        assert config["verification"]["trajectories"] == 100_000

    def test_override_revalidated(self, clean_env):
        """Test that an invalid override is rejected."""
        with pytest.raises(ValueError):
            apply_overrides(load_config(), {"runtime": {"jobs": 0}})


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
