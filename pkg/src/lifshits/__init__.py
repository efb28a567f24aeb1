"""Numerics for classical magnetic Lifshits tails of Poissonian potentials
with anisotropic algebraic decay."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CertificateError,
    ConvergenceError,
    DomainError,
    FitError,
    LifshitsError,
    ParameterError,
    ResolutionWarning,
    ResourceError,
)
from .params_model import DecayParams, derive, validate  # noqa: F401
