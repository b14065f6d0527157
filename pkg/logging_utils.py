#!/usr/bin/env python3
"""
Logging for equidist: one "equidist" logger writing to equidist.log, child
loggers per module, and a trial-index prefix for experiment runs.

Reports go to stdout, so console logging uses stderr.
"""

import os
import logging
from typing import Optional, Tuple

from errors import ConfigurationError

LOG_FILE_NAME = "equidist.log"
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s:%(message)s'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

# Root "equidist" logger once configured
_logger = None


def _level(log_level: str) -> int:
    name = str(log_level).upper()
    if name not in LEVELS:
        raise ConfigurationError(f"unknown log level '{log_level}' (expected one of {', '.join(LEVELS)})")
    return getattr(logging, name)


def _handler(handler: logging.Handler, level: int) -> logging.Handler:
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
    return handler


def setup_logging(log_dir: str, log_level: str, log_to_stdout: bool = False) -> logging.Logger:
    """
    (Re)configure the "equidist" logger with a file handler and an
    optional console handler.

    Calling it again replaces the previous handlers, so each CLI run and
    each test starts from a clean configuration.

    Args:
        log_dir (str): Directory for equidist.log (created if missing)
        log_level (str): Level name, e.g. "WARNING" or "DEBUG"
        log_to_stdout (bool): Also log to the console (stderr)

    Returns:
        logging.Logger: The configured "equidist" logger

    Raises:
        ConfigurationError: If log_level is not a known level name
    """
    global _logger

    level = _level(log_level)
    os.makedirs(log_dir, exist_ok=True)

    logger = logging.getLogger("equidist")
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.close()
    logger.handlers = []

    logger.addHandler(_handler(logging.FileHandler(os.path.join(log_dir, LOG_FILE_NAME)), level))
    if log_to_stdout:
        logger.addHandler(_handler(logging.StreamHandler(), level))

    _logger = logger
    return logger


def resolve_log_options(
    verbose: bool,
    log_level: Optional[str],
    log_to_stdout: bool,
    default_level: str
) -> Tuple[str, bool]:
    """
    Level and console flag from the CLI logging flags.

    --verbose means DEBUG on the console; otherwise --log-level wins over
    the configured default.
    """
    if verbose:
        return "DEBUG", True
    return (log_level or default_level), log_to_stdout


def get_logger(name: str) -> logging.Logger:
    """
    Child logger "equidist.<name>". Configures defaults from config.py on
    first use if setup_logging() has not run yet.
    """
    if _logger is None:
        from config import LOG_DIR, LOG_LEVEL
        setup_logging(LOG_DIR, LOG_LEVEL)

    return logging.getLogger(f"equidist.{name}")


class TrialAdapter(logging.LoggerAdapter):
    """Prefixes every message with "[Trial: i]"."""

    def process(self, msg, kwargs):
        return f"[Trial: {self.extra['trial']}] {msg}", kwargs


def trial_logger(logger: logging.Logger, trial_index: int) -> TrialAdapter:
    return TrialAdapter(logger, {"trial": trial_index})


def log_with_trial(logger: logging.Logger, level: int, trial_index: Optional[int], message: str) -> None:
    """
    Log a message, prefixed with the trial index when there is one.

    Args:
        logger (logging.Logger): Logger instance to use
        level (int): Logging level (DEBUG, INFO, WARNING, ERROR)
        trial_index (int or None): Trial index, or None for no prefix
        message (str): Message to log
    """
    if trial_index is None:
        logger.log(level, message)
    else:
        trial_logger(logger, trial_index).log(level, message)
