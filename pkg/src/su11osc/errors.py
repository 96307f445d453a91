"""Exception types raised across the package."""


class Su11Error(Exception):
    """Base class for all package errors."""


class DomainError(Su11Error, ValueError):
    """An input lies outside the domain where the construction is defined."""


class SingularInvariantError(Su11Error):
    """The invariant coefficient g_minus reached zero or became negative."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class CoordinateSingularityError(Su11Error):
    """Disentangling coordinates diverge (e.g. the classical solution x(t) crosses zero)."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class DegenerateCoefficientError(Su11Error):
    """omega^2(t) hits omega0^2, where the K-basis linearisation divides by zero."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class TruncationError(Su11Error):
    """A state has too much weight at the top of the truncated basis; raise N."""


class ResolutionError(Su11Error):
    """A radial grid is too short or too coarse for the requested function."""


class IntegrationError(Su11Error, RuntimeError):
    """An ODE or time-stepping integration failed."""


class ClassicalCollisionError(Su11Error):
    """A classical trajectory fell into the centre q -> 0."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class RangeError(Su11Error, OverflowError):
    """A matrix exponential would overflow double precision."""
