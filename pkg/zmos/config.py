"""
Handles global application configuration.
"""


import json
from pathlib import Path
from typing import Any, Dict

import confuse

from .errors import ZmosError


class ConfigError(ZmosError):
    """
    Raised when an experiment file cannot be parsed or validated.
    """


def read_experiment_file(path: Path) -> Dict[str, Any]:
    """
    Reads an experiment file and overlays it on top of the packaged defaults.

    Args:
        path: The path to the JSON experiment file.

    Raises:
        `ConfigError` if the file is missing or is not valid JSON.

    Returns:
        The merged configuration, as plain nested dictionaries.

    """
    try:
        raw = json.loads(path.read_text(encoding="utf8"))
    except FileNotFoundError as err:
        raise ConfigError(f"Config file {path} does not exist.") from err
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{path}:{err.lineno}:{err.colno}: {err.msg}"
        ) from err
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object.")

    # A fresh view per file, so that repeated loads don't accumulate sources.
    view = confuse.Configuration("zmos", modname=__name__, read=False)
    view.read(user=False, defaults=True)
    view.set(raw)
    return view.flatten()
