"""Exception types raised across the package."""


class FMCWError(Exception):
    """Base class for all package errors."""


class DegenerateGeometry(FMCWError, ValueError):
    """A point coincides with an antenna, so unit vectors are undefined."""


class AmbiguousGrid(FMCWError, ValueError):
    """The velocity grid violates the unambiguous-Doppler bound."""


class InvalidSNR(FMCWError, ValueError):
    pass


class HypothesisViolated(FMCWError, ValueError):
    """A precondition of the shift bound does not hold; ``condition`` names it."""

    def __init__(self, condition, message):
        super().__init__(f"{condition}: {message}")
        self.condition = condition


class CountMismatch(FMCWError, ValueError):
    pass


class InsufficientData(FMCWError, ValueError):
    pass


class ConfigError(FMCWError, ValueError):
    pass


class GeometryError(FMCWError, ValueError):
    pass


class IndexOutOfRange(FMCWError, IndexError):
    pass
