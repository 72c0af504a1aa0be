"""
Configuration module for metastable-hierarchy.

Handles loading, validation, and management of run configuration from:
1. YAML configuration files
2. Environment variables (override)
3. Default values (fallback)

Configuration Structure:
    analysis:
        state_cap: Largest landscape accepted
        restrict_to_omega_bar: Analyse the sublevel component of the ground states
        exact: Rational trace-chain solves (float fallback when false)
    kawasaki:
        K, L, N0: Lattice-gas parameters; enumeration_cap bounds Omega-bar
    verification:
        beta grids, tolerances, Monte Carlo sizes and precision settings
    runtime:
        jobs: Worker processes for Monte Carlo batches
        log_level: Root logging level
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

VALID_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

DEFAULT_CONFIG = {
    "analysis": {
        "state_cap": 5_000_000,
        "restrict_to_omega_bar": True,
        "exact": True,
        "float_residual": 1e-10,
    },
    "kawasaki": {
        "K": 5,
        "L": 4,
        "N0": 2,
        "enumeration_cap": 10_000_000,
    },
    "verification": {
        "beta_grid": [5.0, 10.0, 20.0],
        "resolvent_beta_grid": [4.0, 6.0, 8.0],
        "exit_tolerance": 1e-3,
        "mc_sigmas": 3.0,
        "mc_beta": 8.0,
        "occupation_bound": 0.05,
        "resolvent_bound": 0.05,
        "trajectories": 100_000,
        "batch_size": 16384,
        "seed": 0,
        "precision_digits": 50,
        "dense_precision_limit": 300,
    },
    "runtime": {
        "jobs": 1,
        "log_level": "INFO",
    },
}

# (environment variable, section, key, parser)
_ENV_OVERRIDES = (
    ("METASTABLE_STATE_CAP", "analysis", "state_cap", int),
    ("METASTABLE_ENUMERATION_CAP", "kawasaki", "enumeration_cap", int),
    ("METASTABLE_SEED", "verification", "seed", int),
    ("METASTABLE_JOBS", "runtime", "jobs", int),
    ("METASTABLE_LOG_LEVEL", "runtime", "log_level", str.upper),
)


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load configuration from YAML file with environment variable overrides.

    Args:
        config_path: Path to YAML configuration file.
                     If None, uses default configuration.

    Returns:
        Dictionary containing merged configuration from:
        1. Default values
        2. YAML file (if provided)
        3. Environment variables (highest priority)

    Raises:
        FileNotFoundError: If config_path is provided but file doesn't exist
        yaml.YAMLError: If YAML file is malformed
        ValueError: If configuration validation fails
    """
    config = _deep_copy_dict(DEFAULT_CONFIG)

    if config_path:
        config_file = Path(config_path)
        if not config_file.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                yaml_config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise yaml.YAMLError(f"Error parsing YAML file {config_path}: {e}")
        if yaml_config:
            if not isinstance(yaml_config, dict):
                raise ValueError(f"Top level of {config_path} must be a mapping")
            config = _deep_merge_dicts(config, yaml_config)
            logger.info(f"Loaded configuration from {config_path}")

    config = _apply_env_overrides(config)
    validate_config(config)

    logger.debug(f"Final configuration: {config}")
    return config


def validate_config(config: Dict[str, Any]) -> None:
    """
    Validate configuration structure and values.

    Raises:
        ValueError: If configuration is invalid
    """
    for key in DEFAULT_CONFIG:
        if key not in config:
            raise ValueError(f"Missing required configuration section: {key}")

    analysis = config["analysis"]
    if not isinstance(analysis["state_cap"], int) or analysis["state_cap"] < 1:
        raise ValueError(f"Invalid state_cap: {analysis['state_cap']}. Must be a positive integer")
    if not analysis["float_residual"] > 0:
        raise ValueError(f"Invalid float_residual: {analysis['float_residual']}")

    kawasaki = config["kawasaki"]
    for key in ("K", "L", "N0", "enumeration_cap"):
        value = kawasaki[key]
        if not isinstance(value, int) or value < 1:
            raise ValueError(f"Invalid kawasaki.{key}: {value}. Must be a positive integer")

    verification = config["verification"]
    for key in ("beta_grid", "resolvent_beta_grid"):
        grid = verification[key]
        if not grid or any(not isinstance(b, (int, float)) or b <= 0 for b in grid):
            raise ValueError(f"Invalid {key}: {grid}. Must be a nonempty list of positive numbers")
    for key in ("exit_tolerance", "mc_sigmas", "mc_beta", "occupation_bound", "resolvent_bound"):
        if not verification[key] > 0:
            raise ValueError(f"Invalid {key}: {verification[key]}. Must be positive")
    for key in ("trajectories", "batch_size", "precision_digits", "dense_precision_limit"):
        if not isinstance(verification[key], int) or verification[key] < 1:
            raise ValueError(f"Invalid {key}: {verification[key]}. Must be a positive integer")
    if not isinstance(verification["seed"], int) or verification["seed"] < 0:
        raise ValueError(f"Invalid seed: {verification['seed']}. Must be a non-negative integer")

    runtime = config["runtime"]
    if not isinstance(runtime["jobs"], int) or runtime["jobs"] < 1:
        raise ValueError(f"Invalid jobs: {runtime['jobs']}. Must be at least 1")
    if runtime["log_level"] not in VALID_LOG_LEVELS:
        raise ValueError(
            f"Invalid log level: {runtime['log_level']}. "
            f"Must be one of: {list(VALID_LOG_LEVELS)}"
        )


def apply_overrides(config: Dict[str, Any], overrides: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    """
    Merge command-line values over a loaded configuration and re-validate.

    None values are skipped so unset flags keep the file value.
    """
    cleaned = {
        section: {k: v for k, v in values.items() if v is not None}
        for section, values in overrides.items()
    }
    merged = _deep_merge_dicts(config, cleaned)
    validate_config(merged)
    return merged


# Private helper functions

def _deep_copy_dict(d: Dict[str, Any]) -> Dict[str, Any]:
    """Deep copy a dictionary."""
    return copy.deepcopy(d)


def _deep_merge_dicts(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """
    Deep merge two dictionaries, with override taking precedence.

    Args:
        base: Base dictionary
        override: Dictionary with override values

    Returns:
        Merged dictionary
    """
    result = _deep_copy_dict(base)

    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge_dicts(result[key], value)
        else:
            result[key] = value

    return result


def _apply_env_overrides(config: Dict[str, Any]) -> Dict[str, Any]:
    """Apply METASTABLE_* environment variable overrides."""
    for var, section, key, parse in _ENV_OVERRIDES:
        if var in os.environ:
            try:
                config[section][key] = parse(os.environ[var])
            except ValueError:
                logger.warning(f"Invalid {var} value: {os.environ[var]}")
    return config
