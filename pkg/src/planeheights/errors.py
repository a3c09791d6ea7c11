"""Shared exception types."""


class PlaneHeightsError(Exception):
    """Base class for all library errors."""


class PolyParseError(PlaneHeightsError, ValueError):
    """Polynomial or rational text that does not match the grammar."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class DegreeUndefinedError(PlaneHeightsError, ValueError):
    """Total degree requested for the zero polynomial."""


class MapValidationError(PlaneHeightsError, ValueError):
    """A map constructor received data that does not define an automorphism."""


class ResourceCapError(PlaneHeightsError, RuntimeError):
    """Coordinate sizes exceeded the configured digit cap (never a wrong answer)."""


class UndecidedPeriodicityError(PlaneHeightsError, RuntimeError):
    """An operation required a periodic/non-periodic verdict but got 'undecided'."""


class PeriodicPointError(PlaneHeightsError, ValueError):
    """An orbit operation that requires an infinite orbit was given a periodic point."""


class OutOfRangeError(PlaneHeightsError, ValueError):
    """Counting threshold below the orbit height (the count is empty there)."""
