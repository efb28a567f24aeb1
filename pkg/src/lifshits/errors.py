"""Exception hierarchy shared by the library and the CLI."""


class LifshitsError(Exception):
    """Base class for all errors raised by :mod:`lifshits`."""


class ParameterError(LifshitsError, ValueError):
    """A model parameter violates a field invariant (e.g. ``beta < 0``)."""


class DomainError(LifshitsError, ValueError):
    """A computation was requested outside its mathematical domain."""


class CertificateError(LifshitsError, ValueError):
    """A Monte Carlo run was refused because its truncation certificate fails."""


class ConvergenceError(LifshitsError, ArithmeticError):
    """An iterative numerical procedure exhausted its budget."""


class FitError(LifshitsError, ArithmeticError):
    """A fitted model does not describe the data."""


class ResourceError(LifshitsError, RuntimeError):
    """A request would exceed a configured resource cap."""


class ResolutionWarning(UserWarning):
    """A grid-based estimate is less accurate than requested."""
