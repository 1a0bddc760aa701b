"""Exception hierarchy shared by all walklab modules."""


class WalkLabError(Exception):
    """Base class for every error raised by walklab."""


class StepSetError(WalkLabError, ValueError):
    """Malformed or invalid step set (bad weights, duplicate jumps, c or d missing)."""


class DomainError(WalkLabError, ValueError):
    """Argument outside the domain of an operation (u = 0, |z| >= rho, ...)."""


class SingularityError(WalkLabError, ZeroDivisionError):
    """Division by a (numerically) zero quantity at a singular point."""


class PoleError(SingularityError):
    """Evaluation of a bivariate generating function on one of its poles."""


class UnsupportedStatisticError(WalkLabError, ValueError):
    """Statistic not defined for this step set (sign changes need Motzkin support)."""


class RegimeError(WalkLabError, ValueError):
    """Operation requested in the wrong drift regime."""


class PeriodicStepSetError(WalkLabError, ValueError):
    """Limit-law predictions refused for periodic or degenerate step sets."""


class NumericError(WalkLabError, ArithmeticError):
    """Numerical procedure failed to converge; ``details`` carries diagnostics."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details
