"""Configuration management with environment variable support.

Provides parsing of SEESAWTRACK_* environment variables with validation
and precedence handling. Only reads specific whitelisted environment variables.
"""

import os
from pathlib import Path
from typing import Any, Dict, Optional

from src.model.config import ScenarioConfig

# Whitelisted environment variables and the config field each one sets
ALLOWED_ENV_VARS = {
    "SEESAWTRACK_SEED": "seed",
    "SEESAWTRACK_N_STEPS": "n_steps",
    "SEESAWTRACK_CONFIG_PATH": "config_path",
}

_INTEGER_FIELDS = {"seed", "n_steps"}


def get_env_config() -> Dict[str, Any]:
    """Extract SEESAWTRACK_* environment variables.

    Returns:
        Dictionary of environment configuration values, integers parsed

    Raises:
        ValueError: If an integer variable does not parse
    """
    env_config = {}
    for var_name, field_name in ALLOWED_ENV_VARS.items():
        value = os.environ.get(var_name)
        if value is None:
            continue
        if field_name in _INTEGER_FIELDS:
            try:
                value = int(value)
            except ValueError:
                raise ValueError(f"{field_name}: {var_name}={value!r} is not an integer")
        env_config[field_name] = value
    return env_config


def resolve_config_path(config_path: Optional[Path] = None) -> Optional[Path]:
    """Pick the config file to read.

    An explicit path wins, then SEESAWTRACK_CONFIG_PATH, then
    ./scenario.json if it exists.

    Raises:
        ValueError: If SEESAWTRACK_CONFIG_PATH names a missing file
    """
    if config_path is not None:
        return Path(config_path)
    env_path = get_env_config().get("config_path")
    if env_path is not None:
        path = Path(env_path)
        if not path.is_file():
            raise ValueError(f"config_path: config file does not exist: {path}")
        return path
    default = ScenarioConfig.get_default_config_path()
    return default if default.exists() else None


def load_config_with_env_override(config_path: Optional[Path] = None) -> ScenarioConfig:
    """Load configuration with environment variable overrides.

    Precedence:
        defaults < config file < environment variables
    """
    config_file = resolve_config_path(config_path)
    config = ScenarioConfig.from_json_file(config_file) if config_file else ScenarioConfig()

    env_config = get_env_config()
    env_config.pop("config_path", None)
    if env_config:
        config = config.with_overrides(**env_config)
    return config


def load_config_with_full_precedence(
    config_file: Optional[Path] = None,
    cli_overrides: Optional[Dict[str, Any]] = None,
) -> ScenarioConfig:
    """Load configuration with full precedence system.

    Args:
        config_file: Optional path to JSON config file
        cli_overrides: Optional dictionary of CLI argument overrides; None
            values are ignored

    Precedence:
        defaults < config file < environment variables < CLI arguments
    """
    config = load_config_with_env_override(config_file)
    if cli_overrides:
        config = config.with_overrides(**cli_overrides)
    return config
