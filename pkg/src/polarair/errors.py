class PolarAirError(Exception):
    """Base class for library errors."""


class ConfigurationError(PolarAirError, ValueError):
    """A configuration value or combination of values is invalid."""

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)


class DegenerateNormalizerError(PolarAirError, ArithmeticError):
    """The received scale symbol is too close to zero to normalise by."""
