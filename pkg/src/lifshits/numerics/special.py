"""Log-Gamma kernel used by every closed-form constant."""

from __future__ import annotations

import math

from ..errors import DomainError

# Bernoulli-number coefficients B_2k / (2k (2k-1)) of the Stirling series.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SHIFT = 12.0


def _stirling(x: float) -> float:
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    for c in reversed(_STIRLING):
        series = series * inv2 + c
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series * inv


def log_gamma(x: float) -> float:
    """Natural logarithm of the Gamma function for ``x > 0``.

    Arguments below 12 are shifted upward with the recurrence
    ``Gamma(x + 1) = x Gamma(x)`` and the Stirling series is summed at the
    shifted argument, where its truncation error is far below 1e-16.
    """
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"log_gamma requires a finite x > 0, got {x!r}")
    if x == 1.0 or x == 2.0:
        return 0.0
    if x >= _SHIFT:
        return _stirling(x)
    logs = []
    y = x
    while y < _SHIFT:
        logs.append(math.log(y))
        y += 1.0
    return math.fsum([_stirling(y), *(-v for v in logs)])


def gamma(x: float) -> float:
    """Gamma function for ``x > 0`` via :func:`log_gamma`."""
    return math.exp(log_gamma(x))
