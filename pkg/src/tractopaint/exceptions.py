"""Exception types raised across the package."""


class TractoPaintError(Exception):
    """Base class for all errors raised by tractopaint."""


class DecodeError(TractoPaintError):
    """Raised when an image byte stream cannot be decoded."""


class InvalidParameter(TractoPaintError, ValueError):
    pass


class InvalidInput(TractoPaintError, ValueError):
    pass


class OutOfBounds(TractoPaintError, IndexError):
    pass


class SeedRejected(TractoPaintError):
    """The seed point does not meet the coherence gate."""
