"""Configuration loading.

Defaults ship as ``netfrak/config/defaults.yaml``. A user YAML file can
override any subset of keys; keys that do not exist in the defaults are
rejected so typos fail loudly instead of being ignored.
"""

from __future__ import annotations

import copy
import os
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from .errors import ConfigError

THREADS_ENV = "NETFRAK_THREADS"


def _read_yaml(text: str, origin: str) -> Dict[str, Any]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"{origin}: invalid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{origin}: top level must be a mapping")
    return data


def load_defaults() -> Dict[str, Any]:
    text = resources.files("netfrak.config").joinpath("defaults.yaml").read_text(encoding="utf-8")
    return _read_yaml(text, "defaults.yaml")


def _merge(base: Dict[str, Any], override: Dict[str, Any], path: str = "") -> None:
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key: {where}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"configuration key {where} must be a mapping")
            _merge(base[key], value, path=f"{where}.")
        else:
            base[key] = value


def load_settings(path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load packaged defaults, optionally overridden by a user YAML file.

    Args:
        path: Optional user configuration file.

    Returns:
        Nested dictionary of settings.
    """
    settings = copy.deepcopy(load_defaults())
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"configuration file not found: {path}")
        _merge(settings, _read_yaml(path.read_text(encoding="utf-8"), str(path)))
    return settings


def worker_count() -> int:
    """Worker cap from NETFRAK_THREADS, or min(8, cpu count)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return max(1, min(8, os.cpu_count() or 1))
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from e
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value
