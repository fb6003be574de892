"""Configuration loading: config.yml defaults merged with environment overrides."""
import copy
import os
from typing import Any, Dict, Optional

import yaml

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    'limits': {
        'max_n': 24,
        'subcube_oracle_max_n': 12,
        'dnf_oracle_max_n': 4,
        'dnf_oracle_max_size': 2,
        'exhaustive_max_n': 4,
    },
    'sampling': {
        'confidence': 0.999,
        'batch_size': 100000,
        'workers': 1,
    },
    'sweep': {
        'chunk_size': 4096,
        'parallelism': 1,
    },
    'logging': {
        'level': 'INFO',
        'to_file': True,
        'log_dir': 'logs',
    },
}

_DEFAULT_PATH = os.path.join(os.path.abspath(os.path.dirname(__file__)), '..', 'config.yml')
_cached: Optional[Dict[str, Dict[str, Any]]] = None


def _get_env(env_var: str) -> Optional[str]:
    """Return a non-empty environment value or None."""
    value = os.getenv(env_var)
    if value is None or value.strip() == '':
        return None
    return value.strip()


def _as_bool(value: str) -> bool:
    return value.lower() in ('1', 'true', 'yes', 'on')


def load_config(config_path: Optional[str] = None) -> Dict[str, Dict[str, Any]]:
    """
    Build the effective configuration.

    Args:
        config_path: YAML file to read. Defaults to $CUBELAB_CONFIG, then config.yml at the repo root.

    Returns:
        Nested dict with the sections of DEFAULT_CONFIG.

    Raises:
        ValueError: If the YAML file exists but is not a mapping, or an override is malformed.
    """
    config = copy.deepcopy(DEFAULT_CONFIG)
    path = config_path or _get_env('CUBELAB_CONFIG') or _DEFAULT_PATH

    if os.path.exists(path):
        with open(path) as c:
            loaded = yaml.safe_load(c) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"Configuration file {path} must contain a mapping")
        for section, values in loaded.items():
            if section not in config or not isinstance(values, dict):
                raise ValueError(f"Unknown configuration section '{section}' in {path}")
            config[section].update(values)

    max_n = _get_env('CUBELAB_MAX_N')
    if max_n is not None:
        try:
            config['limits']['max_n'] = int(max_n)
        except ValueError:
            raise ValueError(f"CUBELAB_MAX_N must be an integer, got '{max_n}'")
    level = _get_env('CUBELAB_LOG_LEVEL')
    if level is not None:
        config['logging']['level'] = level
    to_file = _get_env('CUBELAB_LOG_TO_FILE')
    if to_file is not None:
        config['logging']['to_file'] = _as_bool(to_file)

    if config['limits']['max_n'] < 1:
        raise ValueError("limits.max_n must be at least 1")
    return config


def get_config() -> Dict[str, Dict[str, Any]]:
    """Return the cached configuration, loading it on first use."""
    global _cached
    if _cached is None:
        _cached = load_config()
    return _cached


def reload_config(config_path: Optional[str] = None) -> Dict[str, Dict[str, Any]]:
    """Drop the cache and re-read configuration (tests use this after changing the environment)."""
    global _cached
    _cached = load_config(config_path)
    return _cached


def max_n() -> int:
    """Exact-mode cap on the number of coordinates."""
    return int(get_config()['limits']['max_n'])
