"""
Configuration module for the operformal engine.

This module defines the EngineConfig class, which centralizes the few runtime
knobs the engine honours. Settings are read from environment variables once,
at import time, and logged as they are resolved.

Attributes:
    engine_config (EngineConfig): A singleton instance of the EngineConfig class.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from operformal.logger import logger

DEFAULT_THREADS = 1
DEFAULT_DENSE_THRESHOLD = 64


def _positive_int(name: str, raw: Optional[str], default: int) -> int:
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"{name}={raw!r} is not an integer; using {default}.")
        return default
    if value < 1:
        logger.warning(f"{name}={value} must be positive; using {default}.")
        return default
    return value


class EngineConfig:
    """
    Manages engine configuration settings.

    Attributes:
        threads (int): Upper bound on worker threads used for page cells and
            complex blocks (``OPERFORMAL_THREADS``).
        dense_threshold (int): Matrices with fewer than this many entries are
            reduced with the dense kernel (``OPERFORMAL_DENSE_THRESHOLD``).
    """

    def __init__(self):
        logger.info("Initializing EngineConfig.")
        self.threads: int = _positive_int(
            "OPERFORMAL_THREADS", os.getenv("OPERFORMAL_THREADS"), DEFAULT_THREADS
        )
        logger.info(f"Worker threads capped at {self.threads}.")

        self.dense_threshold: int = _positive_int(
            "OPERFORMAL_DENSE_THRESHOLD",
            os.getenv("OPERFORMAL_DENSE_THRESHOLD"),
            DEFAULT_DENSE_THRESHOLD,
        )
        logger.info(f"Dense rref threshold set to {self.dense_threshold} entries.")
        logger.info("EngineConfig initialized.")

    @property
    def max_workers(self) -> int:
        """Number of workers handed to thread pools."""
        return self.threads

    def pool(self) -> ThreadPoolExecutor:
        """
        Returns a thread pool sized by ``max_workers``.

        Callers use it as a context manager; results are collected with
        ``Executor.map`` so ordering stays deterministic.
        """
        return ThreadPoolExecutor(max_workers=self.max_workers)


engine_config = EngineConfig()
