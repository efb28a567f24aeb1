"""Parameter algebra: derived exponents, validity checks, closed-form constants.

Notation follows the decay model
``|| (|x_perp|^alpha, |x_3|^gamma) ||_{2/beta} U(x) -> g`` for an impurity
potential ``U`` of concentration ``rho`` in a magnetic field ``B``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import DomainError, ParameterError
from .numerics.special import log_gamma

# Below this beta the Gamma ratio is replaced by its exact beta -> 0 limit.
BETA_LIMIT_THRESHOLD = 1e-3


@dataclass(frozen=True)
class DecayParams:
    g: float
    alpha: float
    beta: float
    gamma: float
    rho: float
    B: float = 1.0
    epsilon: float = 1.0

    def __post_init__(self):
        for name in ("g", "alpha", "beta", "gamma", "rho", "B", "epsilon"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite real, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.g <= 0:
            raise ParameterError(f"g must be > 0, got {self.g}")
        if self.alpha <= 2:
            raise ParameterError(f"alpha must be > 2, got {self.alpha}")
        if self.beta < 0:
            raise ParameterError(f"beta must be >= 0, got {self.beta}")
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        # rho = 0 is admitted so that the impurity-free limit can be run.
        if self.rho < 0:
            raise ParameterError(f"rho must be >= 0, got {self.rho}")
        if self.B < 0:
            raise ParameterError(f"B must be >= 0, got {self.B}")
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")

    @property
    def eta(self) -> float:
        return 3.0 * self.alpha * self.gamma / (2.0 * self.gamma + self.alpha)

    @property
    def isotropic(self) -> bool:
        return self.alpha == self.beta == self.gamma

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DerivedParams:
    eta: float
    mu: float
    nu: float
    sigma: float


@dataclass
class ValidityReport:
    integrable: bool
    theorem_applies: bool
    zero_field_ok: bool
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.theorem_applies


def default_sigma(alpha: float, gamma: float) -> float:
    """Midpoint of the admissible window ``1 - 2/a - 1/g < 2 sigma < 2/g``."""
    return (1.0 - 2.0 / alpha + 1.0 / gamma) / 4.0


def derive(params: DecayParams) -> DerivedParams:
    eta = params.eta
    if eta <= 3.0:
        raise DomainError(
            f"eta = {eta:.6g} <= 3: U is not integrable "
            f"(need gamma > alpha/(alpha-2) = {params.alpha / (params.alpha - 2):.6g})"
        )
    return DerivedParams(
        eta=eta,
        mu=3.0 / (eta - 3.0),
        nu=3.0 / eta,
        sigma=default_sigma(params.alpha, params.gamma),
    )


def validate(params: DecayParams) -> ValidityReport:
    """Check integrability, the theorem's window and the zero-field region.

    All boundaries are strict; boundary values are rejected.
    """
    a, c = params.alpha, params.gamma
    msgs: list[str] = []
    lower = a / (a - 2.0)
    upper = 3.0 * a / (a - 2.0)
    integrable = c > lower
    if not integrable:
        msgs.append(f"not integrable: need gamma > alpha/(alpha-2) = {lower:.6g}, got {c:.6g}")
    in_window = integrable and c < upper
    if integrable and not in_window:
        msgs.append(f"outside theorem window: need gamma < 3 alpha/(alpha-2) = {upper:.6g}, got {c:.6g}")
    zero_upper = upper if a <= 5.0 else a / (a - 4.0)
    zero_field_ok = c > lower and c < zero_upper
    if not zero_field_ok:
        msgs.append(f"B = 0 not covered: need {lower:.6g} < gamma < {zero_upper:.6g}")
    field_ok = params.B > 0 or zero_field_ok
    if params.B == 0 and not zero_field_ok:
        msgs.append("B = 0 requested outside the zero-field region")
    if params.rho == 0:
        msgs.append("rho = 0: no impurities, the tail constants degenerate")
    theorem_applies = in_window and field_ok and params.rho > 0
    return ValidityReport(integrable, theorem_applies, zero_field_ok, msgs)


def _gamma_ratio_log(params: DecayParams) -> float:
    """log of (beta/(alpha gamma)) G(b/a) G(b/2g) / G(3b/2 eta); the beta -> 0
    limit of this combination is 3/eta."""
    a, b, c, eta = params.alpha, params.beta, params.gamma, params.eta
    if b < BETA_LIMIT_THRESHOLD:
        return math.log(3.0 / eta)
    return (
        math.log(b / (a * c))
        + log_gamma(b / a)
        + log_gamma(b / (2.0 * c))
        - log_gamma(3.0 * b / (2.0 * eta))
    )


def _require_eta(params: DecayParams) -> float:
    eta = params.eta
    if eta <= 3.0:
        raise DomainError(f"eta = {eta:.6g} <= 3 (gamma must exceed alpha/(alpha-2))")
    return eta


def theorem_bracket(params: DecayParams) -> float:
    """``2 pi rho (beta/alpha gamma) G(b/a) G(b/2g) / G(3b/2eta) G((eta-3)/eta)``."""
    eta = _require_eta(params)
    if params.rho == 0:
        return 0.0
    return math.exp(
        math.log(2.0 * math.pi * params.rho)
        + _gamma_ratio_log(params)
        + log_gamma((eta - 3.0) / eta)
    )


def laplace_constant_closed(params: DecayParams) -> float:
    """``a = rho * int (1 - exp(-u))`` in closed form.

    Equal to ``(eta/3) g^{3/eta}`` times :func:`theorem_bracket`; for
    ``beta < 1e-3`` the exact limit ``2 pi rho g^{3/eta} G(1 - 3/eta)`` is
    used.
    """
    eta = _require_eta(params)
    return (eta / 3.0) * params.g ** (3.0 / eta) * theorem_bracket(params)


def lifshits_constant_paper(params: DecayParams) -> float:
    """The energy-domain constant exactly as printed with the main theorem:
    ``((eta-3)/3) g^{3/(eta-3)} [bracket]^{(eta-3)/eta}``."""
    eta = _require_eta(params)
    return (
        (eta - 3.0) / 3.0
        * params.g ** (3.0 / (eta - 3.0))
        * theorem_bracket(params) ** ((eta - 3.0) / eta)
    )


def lifshits_constant_legendre(a: float, mu: float) -> float:
    """Energy-domain constant ``C`` whose saddle transform is ``a``.

    ``min_E (t E + C E^-mu) = a t^{mu/(mu+1)}`` gives
    ``C = a^{mu+1} mu^mu / (mu+1)^{mu+1}``.
    """
    if not (a > 0 and mu > 0):
        raise DomainError(f"need a > 0 and mu > 0, got a={a!r}, mu={mu!r}")
    return math.exp((mu + 1.0) * math.log(a) + mu * math.log(mu)
                    - (mu + 1.0) * math.log(mu + 1.0))


def saddle_forward(C: float, mu: float) -> float:
    """Inverse of :func:`lifshits_constant_legendre`:
    ``(mu+1) mu^{-mu/(mu+1)} C^{1/(mu+1)}``."""
    if not (C > 0 and mu > 0):
        raise DomainError(f"need C > 0 and mu > 0, got C={C!r}, mu={mu!r}")
    return (mu + 1.0) * mu ** (-mu / (mu + 1.0)) * C ** (1.0 / (mu + 1.0))


def isotropic_constant(alpha: float, g: float, rho: float) -> float:
    """Isotropic specialisation ``alpha = beta = gamma`` of the printed constant."""
    if not 3.0 < alpha < 5.0:
        raise DomainError(f"isotropic constant requires 3 < alpha < 5, got {alpha}")
    bracket = 4.0 * math.pi * rho / alpha * math.exp(log_gamma((alpha - 3.0) / alpha))
    return (alpha - 3.0) / 3.0 * g ** (3.0 / (alpha - 3.0)) * bracket ** ((alpha - 3.0) / alpha)


def isotropic_bracket(alpha: float, rho: float) -> float:
    return 4.0 * math.pi * rho / alpha * math.exp(log_gamma((alpha - 3.0) / alpha))
