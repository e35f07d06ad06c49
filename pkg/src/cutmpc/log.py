"""Logging configuration for cutmpc."""

from __future__ import annotations

import logging


LogLevel = int | str


def get_logger(name: str, log_level: LogLevel | None = None) -> logging.Logger:
    """Get a logger for the given name.

    Args:
        name: The name of the logger.
              Will be prefixed with 'cutmpc' unless it already is (module ``__name__``)
        log_level: The logging level to set for the logger

    Returns:
        A logger instance
    """
    qualified = name if name == "cutmpc" or name.startswith("cutmpc.") else f"cutmpc.{name}"
    logger = logging.getLogger(qualified)
    if log_level is not None:
        logger.setLevel(log_level)
    return logger


def configure(verbose: bool = False) -> None:
    """Attach a stream handler to the root logger (command-line entry points only)."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
