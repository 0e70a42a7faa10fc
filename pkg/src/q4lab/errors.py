"""Exception hierarchy shared across the lab."""


class Q4Error(Exception):
    """Base class for all lab-specific errors."""


class DomainError(Q4Error, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class SingularityError(Q4Error, ZeroDivisionError):
    """Evaluation hit a pole or a singular denominator."""


class GeometryError(Q4Error, RuntimeError):
    """Construction of a geometric object (oval, contour) failed."""


class DegenerateLevelError(Q4Error, ValueError):
    """The requested level is at (or too close to) a critical level."""


class ConvergenceError(Q4Error, RuntimeError):
    """An adaptive scheme stalled before reaching the requested tolerance."""


class UnsupportedIndexError(Q4Error, KeyError):
    """A moment index outside the supported reduction table was requested."""


class PathProximityError(Q4Error, ValueError):
    """A continuation path comes too close to a singular point or the cut."""


class ConsistencyError(Q4Error, RuntimeError):
    """An internal cross-check that must hold algebraically failed."""
