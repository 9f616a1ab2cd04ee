"""Exception types shared across the package."""


class PhotonDetectError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PhotonDetectError, ValueError):
    """Inconsistent spaces, mode sets or experiment configuration."""


class ShapeError(PhotonDetectError, ValueError):
    """Operator dimensions do not match the space they act on."""


class NumericError(PhotonDetectError, ArithmeticError):
    """Non-finite values or a failed convergence gate."""


class OutcomeImpossibleError(PhotonDetectError):
    """A post-measurement state was requested for a zero-probability outcome."""

    def __init__(self, probability: float, message: str | None = None):
        self.probability = probability
        super().__init__(message or f"outcome has probability {probability:.3e}; post state undefined")


class UndefinedMetricError(PhotonDetectError):
    """A metric has no meaningful value for the given inputs (e.g. zero response on both paths)."""
