"""Exception types shared across the package."""


class ResonanceError(Exception):
    """Base class for all package errors."""


class InputError(ResonanceError, ValueError):
    """Bad signal, configuration or file contents."""


class EstimationError(ResonanceError, RuntimeError):
    """Numerical failure inside the estimator."""
