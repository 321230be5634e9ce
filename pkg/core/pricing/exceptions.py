"""
Exceptions raised by the pricing engine.
"""


class PricingError(Exception):
    """Base class for every engine failure."""


class ValidationFailed(PricingError, ValueError):
    """An input violates a documented invariant."""


class InsufficientDataError(PricingError):
    """Not enough observations for the requested estimate."""


class InvalidPriceError(ValidationFailed):
    """A price that must be positive is not."""

    def __init__(self, message, day=None):
        super().__init__(message)
        self.day = day


class MalformedInputError(ValidationFailed):
    """A row of delimited input could not be parsed."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class CapacityError(PricingError):
    """The requested simulation exceeds the configured grid cap."""


class ShapeMismatchError(ValidationFailed):
    """Arrays passed together do not have compatible shapes."""
