"""
Custom exceptions for the Renyi dimension toolkit.
"""


class RenyiDimensionsError(Exception):
    """Base exception for all renyi dimension toolkit errors."""
    pass


class DomainError(RenyiDimensionsError):
    """Raised when a parameter lies outside its mathematical domain."""
    pass


class ResourceLimitError(RenyiDimensionsError):
    """Raised when an enumeration or convolution would exceed its size cap."""
    pass


class PrecisionGuardError(RenyiDimensionsError):
    """Raised when a scale is too fine for the resolution of a discretized measure."""
    pass


class QuadratureError(RenyiDimensionsError):
    """Raised when step-halving quadrature does not settle."""

    def __init__(self, message: str, estimates=None):
        super().__init__(message)
        self.estimates = list(estimates or [])


class EstimatorError(RenyiDimensionsError):
    """Raised when a table cannot support the requested estimate."""
    pass


class RationalModeError(RenyiDimensionsError):
    """Raised when exact arithmetic cannot represent a profile value."""
    pass


class InvariantViolationError(RenyiDimensionsError):
    """Raised when a computed quantity breaks a proven bound."""
    pass


class ConfigError(RenyiDimensionsError):
    """Raised when a configuration file or override cannot be parsed."""

    def __init__(self, message: str, line: int = None, key: str = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if key is not None:
            location.append(f"key '{key}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.line = line
        self.key = key


class ArtifactNotFoundError(RenyiDimensionsError):
    """Raised when a CLI input artifact does not exist."""
    pass


class OutputSaveError(RenyiDimensionsError):
    """Raised when output cannot be saved."""
    pass
