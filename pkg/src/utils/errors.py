"""
Exception hierarchy for the feature-network toolkit.

The CLI maps ValidationError to exit code 1 and everything else to exit code 2.
"""


class FeatnetError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FeatnetError, ValueError):
    """Input or precondition violation."""


class DegenerateInputError(ValidationError):
    """Numerically degenerate input (zero denominators, all-equal spectra, ...)."""


class NpyFormatError(ValidationError):
    """File violates the supported NPY v1.0 subset."""


class TrainingDivergedError(FeatnetError, RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, message: str, model=None, log=None):
        super().__init__(message)
        self.model = model
        self.log = log


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(error, ValidationError):
        return EXIT_VALIDATION
    return EXIT_RUNTIME
