"""
Handles custom logger configuration.
"""


import os
import sys
from pathlib import Path

from loguru import logger

_LEVELS = {
    "error": "ERROR",
    "warn": "WARNING",
    "info": "INFO",
    "debug": "DEBUG",
}
"""
Maps the values accepted in `ZMOS_LOG` to loguru level names.
"""
LOG_ENV_VAR = "ZMOS_LOG"
"""
Environment variable that selects the console log level.
"""


def console_level() -> str:
    """
    Returns:
        The loguru level to use for console output, based on `ZMOS_LOG`.

    """
    requested = os.environ.get(LOG_ENV_VAR, "info").strip().lower()
    return _LEVELS.get(requested, "INFO")


def config_logger(name: str, log_dir: Path | None = None) -> None:
    """
    Configures the default logger.

    Args:
        name: The name to use for the log file.
        log_dir: Directory to write the log file to. If not provided, only
            console logging is configured.

    """
    logger.remove()

    logger.add(sys.stderr, level=console_level())
    requested = os.environ.get(LOG_ENV_VAR)
    if requested is not None and requested.strip().lower() not in _LEVELS:
        logger.warning(
            "Unknown {} value '{}', using 'info'.", LOG_ENV_VAR, requested
        )

    if log_dir is not None:
        log_dir.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_dir / f"{name}.log",
            level="DEBUG",
            enqueue=True,
            retention="30 days",
        )
