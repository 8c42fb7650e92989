"""Exception hierarchy.

Validation errors mean the caller handed us something malformed (CLI exit
code 2). Numerical guard errors mean the inputs were well formed but the
requested computation cannot be trusted at this resolution (CLI exit code 3).
"""


class FractalKineticsError(Exception):
    """Base class for everything raised on purpose by this package."""


class ValidationError(FractalKineticsError):
    """A precondition on user input failed."""


class OffCurveError(ValidationError):
    """A point handed to invert() does not lie on the curve.

    Carries the distance to the nearest chord so callers can report it.
    """

    def __init__(self, message: str, nearest_distance: float):
        super().__init__(message)
        self.nearest_distance = nearest_distance


class NumericalGuardError(FractalKineticsError):
    """A resolution, stability, or truncation guard tripped."""


class ResolutionError(NumericalGuardError):
    """Grid too coarse for the requested operation."""


class BoundaryProximityError(NumericalGuardError):
    """A quantity was requested too close to the conjugate-domain ends."""


class BoundaryEscapeError(NumericalGuardError):
    """Too much probability mass left the truncated domain in one step."""


class StabilityError(NumericalGuardError):
    """Explicit time step exceeds the stability bound."""


class TimeRangeError(NumericalGuardError):
    """Requested evolution time violates a kernel-width guard.

    Carries the largest admissible time for the message and for callers.
    """

    def __init__(self, message: str, max_admissible: float):
        super().__init__(message)
        self.max_admissible = max_admissible


class AmbiguousScalingError(NumericalGuardError):
    """Level sums neither grow nor decay decisively; deeper levels needed."""
