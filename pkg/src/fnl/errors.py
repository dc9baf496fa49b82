class FnlError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FnlError, ValueError):
    pass


class ResourceError(FnlError):
    """A configured cap (strategy count, dimension) would be exceeded."""


class UnsupportedError(FnlError):
    pass


class SolverError(FnlError):
    pass


class NotAntidistinguishingError(FnlError):
    """A measurement element annihilates none of the states."""

    def __init__(self, message, element):
        super().__init__(message)
        self.element = element
