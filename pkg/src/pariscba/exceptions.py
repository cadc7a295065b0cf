"""Exception types raised by pariscba.

Every error also derives from the builtin a caller would naturally catch
(``ValueError`` for bad inputs, ``RuntimeError`` for failed searches).
"""

from typing import Optional


class PariscbaError(Exception):
    """Base class for all pariscba errors"""


class ScenarioParseError(PariscbaError, ValueError):
    """A scenario, estimates or tax-record file could not be parsed."""

    def __init__(
        self,
        message: str,
        row: Optional[int] = None,
        column: Optional[str] = None,
    ):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        prefix = ", ".join(location)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class DomainError(PariscbaError, ValueError):
    """An input lies outside the domain of the operation."""


class AlignmentError(PariscbaError, ValueError):
    """Two time series do not share the same year axis."""


class SingularDesignError(PariscbaError, ValueError):
    """The estimates cannot identify the parameters of a functional form."""


class DistributionError(PariscbaError, ValueError):
    """Invalid Monte Carlo distribution parameters."""


class CalibrationError(PariscbaError, RuntimeError):
    """Calibration did not reach the anchor tolerance.

    ``best`` holds the best-so-far parameters and ``residuals`` the anchor
    errors (model minus target, °C) at those parameters.
    """

    def __init__(self, message: str, best, residuals):
        self.best = best
        self.residuals = residuals
        super().__init__(message)


class InfeasibleCeilingError(PariscbaError, ValueError):
    """No admissible emission path keeps warming below the ceiling."""

    def __init__(self, ceiling: float, min_peak: float):
        self.ceiling = ceiling
        self.min_peak = min_peak
        super().__init__(
            f"ceiling {ceiling:.2f} °C is infeasible: "
            f"minimum achievable peak temperature is {min_peak:.3f} °C"
        )


class JobFailedError(PariscbaError, RuntimeError):
    """One or more jobs run by a JobManager failed."""

    def __init__(self, failed):
        self.failed = failed
        first = failed[0]
        super().__init__(
            f"{len(failed)} job(s) failed; first: "
            f"{first.error_type}: {first.error_message}"
        )
