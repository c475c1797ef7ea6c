"""
Utility functions for qcrb package
    - logging,
    - json files,
    - seeded random generators,
    - small dense-array helpers shared by the numerical modules
"""

import json
import logging
from typing import Any, Optional, Sequence, Union

import numpy as np

### Simple logging utility for qcrb package ###

_default_logger: Optional[logging.Logger] = None


def init_logger(
    name: Optional[str] = None,
    level: int = logging.INFO,
    logfile: Optional[str] = None,
    fmt: Optional[str] = None,
) -> logging.Logger:
    """
    Initialize and return a logger.

    - name: logger name (defaults to 'qcrb' if None)
    - level: logging level (e.g. logging.DEBUG)
    - logfile: optional path to a file to also log to
    - fmt: optional format string for log messages
    """
    global _default_logger
    name = name or "qcrb"
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # remove existing handlers to allow re-init
    for h in list(logger.handlers):
        logger.removeHandler(h)

    fmt = fmt or "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    formatter = logging.Formatter(fmt)

    sh = logging.StreamHandler()
    sh.setFormatter(formatter)
    logger.addHandler(sh)

    if logfile:
        fh = logging.FileHandler(logfile)
        fh.setFormatter(formatter)
        logger.addHandler(fh)

    _default_logger = logger
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Return the default logger if initialized, otherwise return a named logger.
    """
    if _default_logger is not None:
        return _default_logger
    return logging.getLogger(name or "qcrb")


### Simple json reader/writer ###


def read_json(path: str) -> Any:
    with open(path, "r") as f:
        return json.load(f)


def write_json(path: str, obj: Any) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)


### Random generators ###


def make_rng(seed: Optional[Union[int, Sequence[int]]] = None) -> np.random.Generator:
    """
    Return a numpy Generator; the same seed always yields the same stream.
    """
    return np.random.default_rng(seed)


### Dense array helpers ###


def dagger(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def hermitian_part(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + dagger(x))


def complex_to_pairs(x: np.ndarray) -> list:
    """
    Nested [[re, im], ...] lists for a complex array (json friendly).
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim == 0:
        return [float(x.real), float(x.imag)]
    return [complex_to_pairs(row) for row in x]


def pairs_to_complex(data: Any) -> np.ndarray:
    """
    Inverse of complex_to_pairs: innermost two-element lists are (re, im).
    """
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


### End of qcrb/utils.py ###
