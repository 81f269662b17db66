"""Exception hierarchy shared by the library and the CLI."""


class ExtremalGammaError(Exception):
    """Base class for all package errors."""


class DomainError(ExtremalGammaError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(ExtremalGammaError, ArithmeticError):
    """An iterative method hit its iteration cap before reaching tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class RegimeError(ExtremalGammaError):
    """Parameters do not satisfy the regime an operation was asked to use.

    ``diagnostics`` carries the finite-n quantities that triggered the error,
    so callers can tell a wrong regime apart from an ``n`` that is simply too
    small for the asymptotics.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class UnsupportedOperation(ExtremalGammaError):
    """The requested operation is not defined for this object (e.g. the CDF of H)."""


class ResourceError(ExtremalGammaError):
    """Requested work exceeds the configured budget."""


class UsageError(ExtremalGammaError, ValueError):
    """Inconsistent or malformed request."""
