"""
Loading and validation of experiment files.
"""


import os
from pathlib import Path
from typing import List

from loguru import logger
from pydantic import ValidationError

from ..config import ConfigError, read_experiment_file
from .schemas import ExperimentConfig


def _describe_errors(error: ValidationError) -> List[str]:
    """
    Args:
        error: A validation error.

    Returns:
        One line per failing field, prefixed with its dotted path.

    """
    lines = []
    for detail in error.errors():
        location = ".".join(
            str(part) for part in detail["loc"] if part != "__root__"
        )
        lines.append(f"{location or '<root>'}: {detail['msg']}")
    return lines


def load_experiment_config(path: Path) -> ExperimentConfig:
    """
    Reads an experiment file, fills in the defaults, and validates it.

    Args:
        path: The JSON experiment file.

    Raises:
        `ConfigError` if the file can't be read or parsed, or any field is
        invalid. The message names every failing field.

    Returns:
        The configuration, with the experiment root made absolute.

    """
    settings = read_experiment_file(path)
    try:
        config = ExperimentConfig.parse_obj(settings)
    except ValidationError as err:
        raise ConfigError(
            "Invalid experiment configuration:\n  "
            + "\n  ".join(_describe_errors(err))
        ) from err

    root = config.paths.root
    if not root.is_absolute():
        root = (path.parent / root).resolve()
    logger.debug("Experiment root is {}.", root)
    return config.copy(
        update=dict(paths=config.paths.copy(update=dict(root=root)))
    )


def ensure_writable_root(config: ExperimentConfig) -> Path:
    """
    Creates the experiment root if needed.

    Args:
        config: The configuration.

    Raises:
        `ConfigError` if the root can't be created or written to.

    Returns:
        The root.

    """
    root = config.paths.root
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ConfigError(f"paths.root: cannot create {root}: {err}") from err
    if not os.access(root, os.W_OK):
        raise ConfigError(f"paths.root: {root} is not writable.")
    return root
