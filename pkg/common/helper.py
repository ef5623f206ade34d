""" Module implementing helper methods """

from datetime import datetime
import logging
import math
import os
import sys

import common.constants as const

def ensure_dir(path: str) -> str:
    """ Creates the output directory if needed and returns it.

        Args:
            - path (str): Directory path

        Returns:
            The same path.
    """
    os.makedirs(path, exist_ok=True)
    return path

def time_str() -> str:
    """ Returns a timestamp usable in file names """
    return datetime.now().strftime('%Y-%m-%d_%H_%M_%S')

def require_finite(value: float, name: str) -> float:
    """ Returns value as float or raises if it is NaN or infinite.

        Args:
            - value (float): Value to check
            - name (str): Name used in the error message

        Raises:
            ValueError: On non-finite values
    """
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value

ENV_LEVELS = {"off": logging.CRITICAL, "info": logging.INFO, "trace": logging.DEBUG}

def env_log_level() -> int:
    """ Base log level from the DOCKMPC_LOG environment variable, WARNING if unset """
    value = os.environ.get(const.LOG_ENV_VAR)
    if value is None:
        return logging.WARNING
    if value.lower() not in ENV_LEVELS:
        logging.getLogger(__name__).warning("Ignoring unknown %s=%s, use off, info or trace",
                                            const.LOG_ENV_VAR, value)
        return logging.WARNING
    return ENV_LEVELS[value.lower()]

def configure_logging(verbose: int = 0, log_file: bool = False) -> int:
    """ Configures the root logger once per process.

        Args:
            - verbose (int): Number of -v flags, 1 for INFO and 2 or more for DEBUG
            - log_file (bool): Also write log_dockmpc_<time>.log

        Returns:
            int: Effective level
    """
    level = env_log_level()
    if verbose == 1:
        level = min(level, logging.INFO)
    elif verbose >= 2:
        level = logging.DEBUG

    logging.basicConfig(stream=sys.stderr, format=const.LOG_FORMAT)
    root = logging.getLogger()
    root.setLevel(level)
    if log_file:
        handler = logging.FileHandler(f"log_dockmpc_{time_str()}.log", encoding="utf-8")
        handler.setFormatter(logging.Formatter(const.LOG_FORMAT))
        root.addHandler(handler)
    return level
