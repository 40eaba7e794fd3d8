"""Exception types shared across the package."""


class GNHeatError(Exception):
    """Base class for all package errors."""


class DomainError(GNHeatError, ValueError):
    """A state left the admissible domain (e.g. a non-positive temperature)."""


class UsageError(GNHeatError, TypeError):
    """An operation was called with arguments that do not fit together."""


class ConfigurationError(GNHeatError, ValueError):
    """A scenario or run configuration is invalid.

    ``field`` names the offending configuration entry when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class BlowUpError(GNHeatError, RuntimeError):
    """Time stepping produced non-finite or inadmissible values.

    ``time`` is the last time at which the solution was still valid and ``x``
    the coordinate of the first offending node (``None`` if not localised).
    """

    def __init__(self, message, time, x=None):
        self.time = time
        self.x = x
        where = f" at x={x!r}" if x is not None else ""
        super().__init__(f"{message} (last valid t={time!r}{where})")


class InsufficientSignalError(GNHeatError, ValueError):
    """A diagnostic could not be extracted from the available data."""
