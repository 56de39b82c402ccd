"""Exception types raised by the library."""


class PainleveError(Exception):
    """Base class for all library errors."""


class DegenerateContact(PainleveError):
    """|p| is below the contact tolerance, so F_z = -b/p is not usable."""


class SlipSpeedZero(PainleveError):
    """The slip speed fell below tolerance; the rod is treated as stuck."""


class DomainError(PainleveError, ValueError):
    """An argument lies outside the admissible domain."""


class UndefinedValue(DomainError):
    """A closed-form expression has no value at the requested point."""


class OffManifold(PainleveError):
    """A point that should lie on {b = 0, p = 0} does not."""


class OffParadoxBoundary(PainleveError):
    """(theta, phi) does not satisfy p(theta, phi) = 0."""


class GridTooLarge(PainleveError):
    """Requested sampling grid exceeds the configured cell cap."""


class StepFailure(PainleveError):
    """The ODE step controller gave up.

    ``last_state`` holds the last state that was accepted.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class AmbiguousOutcome(PainleveError):
    """Two terminating events are too close together to order reliably."""


class NoSignChange(PainleveError):
    """Every initial condition in a fan produced the same verdict."""
