"""
Logging utilities for the analysis pipeline.
"""

import logging
import sys
from datetime import datetime

PACKAGE_LOGGER = "src"


class Logger:
    """Handles user-facing logging for the pipeline."""

    _configured = False

    @staticmethod
    def configure(verbose: bool = False, stream=None):
        """
        Install a single stderr handler on the package logger.

        Args:
            verbose: If True, DEBUG messages are shown as well
            stream: Output stream (default: sys.stderr)
        """
        root = logging.getLogger(PACKAGE_LOGGER)
        for handler in list(root.handlers):
            root.removeHandler(handler)
        handler = logging.StreamHandler(stream or sys.stderr)
        handler.setFormatter(logging.Formatter(
            '[%(asctime)s] %(levelname)s: %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        root.addHandler(handler)
        root.setLevel(logging.DEBUG if verbose else logging.INFO)
        root.propagate = False
        Logger._configured = True

    @staticmethod
    def _logger() -> logging.Logger:
        if not Logger._configured:
            Logger.configure()
        return logging.getLogger(f"{PACKAGE_LOGGER}.pipeline")

    @staticmethod
    def log_step(step_num, description: str, status: str = "STARTED"):
        """
        Log a formatted step banner with timestamp.

        Args:
            step_num: Step number (can be int or string like "3.5")
            description: Description of the step
            status: Status (STARTED, COMPLETED, FAILED, etc.)
        """
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        Logger._logger().info(
            f"\n{'='*80}\n[{timestamp}] Step {step_num}: {description} - {status}\n{'='*80}"
        )

    @staticmethod
    def log_info(message: str):
        """Log an info message."""
        Logger._logger().info(message)

    @staticmethod
    def log_warning(message: str):
        """Log a warning message."""
        Logger._logger().warning(message)

    @staticmethod
    def log_error(message: str):
        """Log an error message."""
        Logger._logger().error(message)
