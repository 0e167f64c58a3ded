"""Exception types shared across the package.

CLI exit codes: 0 pass, 1 threshold failure, 2 inconclusive, 3 usage/config
error, 4 numerical abort.
"""


class FoliflowError(Exception):
    """Base class for all package errors."""


class OutOfDomainError(FoliflowError):
    """A point or index lies outside the grid / validity domain."""


class InvalidCurveError(FoliflowError):
    """Polyline does not satisfy the Curve invariants."""


class ConfigError(FoliflowError):
    """Invalid configuration (CLI exit code 3)."""


class CflError(ConfigError):
    """Time step violates the stability bound; the step is refused."""


class CurveExtinct(FoliflowError):
    """Curve length fell below the extinction threshold during evolution."""

    def __init__(self, time: float, length: float):
        super().__init__(f"curve extinct at t={time:.6g} (length {length:.3e})")
        self.time = time
        self.length = length


class ExtinctionError(FoliflowError):
    """Requested an exact shrinking leaf past its extinction time."""


class NumericalAbort(FoliflowError):
    """Non-finite values appeared during time stepping (CLI exit code 4).

    Carries the last valid field so the CLI can emit a diagnostic snapshot.
    """

    def __init__(self, message: str, field=None, step: int | None = None):
        super().__init__(message)
        self.field = field
        self.step = step
