import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import ValidationError

from config.consts import THREADS_ENV_VAR
from config.logging_config import setup_logger
from helpers.exceptions import ConfigError
from models.run_config_model import RunConfig

LOG = setup_logger(__name__)


def load_config_file(path: Optional[Union[str, Path]]) -> Dict[str, Any]:
    """
    Read a YAML config file whose keys mirror the CLI flag names.

    @param path: File to read; None gives an empty mapping.
    @raises ConfigError: If the file is missing, unparsable or not a mapping.
    """
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file {path} does not exist")
    try:
        values = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file {path} is not valid YAML: {e}")
    if values is None:
        return {}
    if not isinstance(values, dict):
        raise ConfigError(f"Config file {path} must hold a mapping, got {type(values).__name__}")
    return {str(k).replace("-", "_"): v for k, v in values.items()}


def merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive merge; None overrides leave the base value in place."""
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def resolve_threads(flag: Optional[int] = None) -> int:
    """
    Thread count from the --threads flag, else the environment variable, else 1.
    @raises ConfigError: If the resolved value is not a positive integer.
    """
    if flag is not None:
        value: Any = flag
    else:
        value = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        threads = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {value!r}")
    if threads < 1:
        raise ConfigError(f"Thread count must be at least 1, got {threads}")
    return threads


def build_run_config(config_path: Optional[Union[str, Path]] = None, **overrides) -> RunConfig:
    """
    Resolve the settings of a run: CLI flag > config file > built-in default.

    :raises ConfigError: when the merged values do not validate.
    """
    values = merge(load_config_file(config_path), overrides)
    values["threads"] = resolve_threads(overrides.get("threads") if overrides.get("threads") is not None
                                        else values.get("threads"))
    try:
        config = RunConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"Invalid run configuration: {e}")
    LOG.debug(f"Resolved run configuration: {snapshot(config)}")
    return config


def snapshot(config: RunConfig) -> Dict[str, Any]:
    """JSON-compatible dump written as config.yaml into run directories."""
    return config.model_dump(mode="json")


def load_snapshot(path: Union[str, Path]) -> RunConfig:
    """Read a config.yaml snapshot back, e.g. to re-run a previous invocation."""
    try:
        return RunConfig.model_validate(load_config_file(path))
    except ValidationError as e:
        raise ConfigError(f"Snapshot {path} does not validate: {e}")


def derive(config: RunConfig, **updates) -> RunConfig:
    """Validated copy of a configuration with some fields replaced; None updates are ignored."""
    try:
        return RunConfig.model_validate(merge(snapshot(config), updates))
    except ValidationError as e:
        raise ConfigError(f"Invalid run configuration: {e}")
