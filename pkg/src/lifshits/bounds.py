"""Two-sided bounds on the shifted Laplace transform of the IDOS.

The lower bound comes from a trial state that is the lowest Landau level
transversally and a smooth bump of width ``t^sigma`` along the field; after
rescaling it smears the impurity potential with the probability density
``delta_t``.  The upper bound is the Poisson Laplace functional of the
potential times the free magnetic heat-kernel prefactor.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, ResolutionWarning
from .numerics.integrals import I_t
from .numerics.quadrature import QuadResult
from .params_model import DecayParams, default_sigma, derive
from .potential import ImpurityPotential, canonical_potential, log_anisotropic_norm, u_limit_rz


def sigma_window(alpha: float, gamma: float) -> tuple[float, float]:
    """Open interval of admissible ``sigma``: ``1 - 2/a - 1/g < 2 sigma < 2/g``."""
    return 0.5 * (1.0 - 2.0 / alpha - 1.0 / gamma), 1.0 / gamma


def _bump(s):
    s = np.asarray(s, float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _tanh_rule(n: int, span: float = 4.0):
    # s = tanh(v): the bump decays like exp(-cosh(v)^2) in v, so the
    # trapezoid rule converges double exponentially
    v = np.linspace(-span, span, n)
    h = v[1] - v[0]
    s = np.tanh(v)
    ds = h / np.cosh(v) ** 2
    return s, ds


def _bump_moments(n: int):
    s, ds = _tanh_rule(n)
    inside = np.abs(s) < 1.0
    s, ds = s[inside], ds[inside]
    one_m = 1.0 / np.cosh(np.arctanh(s)) ** 2  # 1 - s^2 without cancellation
    f2 = np.exp(-2.0 / one_m)
    norm2 = math.fsum(f2 * ds)
    # phi' = phi * (-2 s / (1 - s^2)^2)
    kin = 0.5 * math.fsum(f2 * 4.0 * s * s / one_m ** 4 * ds)
    return norm2, kin


@dataclass(frozen=True)
class VariationalProfile:
    sigma: float
    bump_normalization: float
    kinetic_phi: float

    def phi(self, s):
        """Normalised bump ``c exp(-1/(1 - s^2))`` on ``(-1, 1)``."""
        return self.bump_normalization * _bump(s)


def make_profile(params: DecayParams, sigma: Optional[float] = None,
                 check_window: bool = True, nodes: int = 801) -> VariationalProfile:
    """Trial profile; ``sigma`` defaults to the midpoint of the admissible window."""
    if sigma is None:
        sigma = default_sigma(params.alpha, params.gamma)
    lo, hi = sigma_window(params.alpha, params.gamma)
    if check_window and not lo < sigma < hi:
        raise DomainError(f"sigma = {sigma:.6g} outside the admissible window ({lo:.6g}, {hi:.6g})")
    norm2, kin = _bump_moments(nodes)
    return VariationalProfile(float(sigma), 1.0 / math.sqrt(norm2), kin / norm2)


def _widths(t: float, params: DecayParams, profile: VariationalProfile):
    """Transverse standard deviation and longitudinal half-width of ``delta_t``."""
    if not params.B > 0:
        raise DomainError("the Landau-level trial state needs B > 0")
    sd = 1.0 / math.sqrt(params.B * t ** (2.0 / params.alpha))
    w = t ** (profile.sigma - 1.0 / params.gamma)
    return sd, w


def delta_t(x, t: float, params: DecayParams, profile: VariationalProfile):
    """Density ``t^{2/a + 1/g} |psi(t^{1/a} x_perp, t^{1/g} x_3)|^2``."""
    x = np.asarray(x, float)
    sd, w = _widths(t, params, profile)
    r2 = x[..., 0] ** 2 + x[..., 1] ** 2
    trans = np.exp(-0.5 * r2 / sd ** 2) / (2.0 * math.pi * sd ** 2)
    longi = profile.phi(x[..., 2] / w) ** 2 / w
    return trans * longi


# --------------------------------------------------------------------------
# the inner convolution (delta_t * scaled U)(x)


@dataclass(frozen=True)
class InnerRule:
    """Product rule for ``E[f(x - d)]`` with ``d ~ delta_t``.

    ``d_3 = w S`` with ``S`` distributed as ``phi^2`` (Gauss-Legendre with
    the density folded into the weights).  ``|d_perp|^2 = 2 sd^2 E`` with
    ``E ~ Exp(1)`` (Gauss-Laguerre) and a uniform relative angle (midpoint
    rule, spectrally accurate for the periodic angular average).
    """

    n_long: int = 48
    n_radial: int = 12
    n_angle: int = 12

    def nodes(self):
        s, ws = leggauss(self.n_long)
        ws = ws * _bump(s) ** 2
        ws = ws / math.fsum(ws)
        e, we = laggauss(self.n_radial)
        we = we / math.fsum(we)
        th = (np.arange(self.n_angle) + 0.5) * math.pi / self.n_angle
        return s, ws, e, we, np.cos(th)

    def coarse(self) -> "InnerRule":
        return InnerRule(max(8, self.n_long // 2), max(4, self.n_radial // 2),
                         max(4, self.n_angle // 2))


def convolved_scaled_U(r, z, t: float, U: ImpurityPotential,
                       profile: VariationalProfile, rule: InnerRule = InnerRule()):
    """``int delta_t(x - y) t U(t^{1/a} y_perp, t^{1/g} y_3) dy`` at ``(r, z)``."""
    r = np.atleast_1d(np.asarray(r, float))
    z = np.atleast_1d(np.asarray(z, float))
    sd, w = _widths(t, U.params, profile)
    s, ws, e, we, cth = rule.nodes()
    a = np.sqrt(2.0 * e)[None, :, None] * sd
    rr = r[:, None, None]
    rp = np.sqrt(np.maximum(rr * rr + a * a + 2.0 * rr * a * cth[None, None, :], 0.0))
    out = np.zeros(r.shape)
    for k in range(s.size):
        zz = np.abs(z - w * s[k])[:, None, None]
        vals = U.scaled_rz(t, rp, zz)
        out += ws[k] * (vals.mean(axis=2) @ we)
    return out


# --------------------------------------------------------------------------
# smeared exponent J(t)


@dataclass(frozen=True)
class SmearedGrid:
    """Outer grid in ``r = lam^{1/a} cos(th)``, ``z = lam^{1/g} sin(th)``,
    ``lam = exp(xi)``; the pseudo-norm is ``lam * n(th)`` on it."""

    step: float = 0.25
    xi_hi: float = 16.0
    skin: float = 23.0
    n_theta: int = 16


def _theta_rule(params: DecayParams, n: int):
    # split at the crease cos^a = sin^g of the max pseudo-norm
    a, c = params.alpha, params.gamma
    lo, hi = 0.0, 0.5 * math.pi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if a * math.log(math.cos(mid)) > c * math.log(math.sin(mid)):
            lo = mid
        else:
            hi = mid
    kink = 0.5 * (lo + hi)
    x, wx = leggauss(n)
    th, wt = [], []
    for a0, b0 in ((0.0, kink), (kink, 0.5 * math.pi)):
        th.append(a0 + (b0 - a0) * 0.5 * (x + 1.0))
        wt.append(wx * 0.5 * (b0 - a0))
    return np.concatenate(th), np.concatenate(wt)


def _tail(params: DecayParams, n_th, lam_hi: float, terms: int = 40):
    """``int_{lam_hi}^inf lam^{3/eta - 1} (1 - exp(-g/(lam n))) dlam`` per angle."""
    nu = 3.0 / params.eta
    X = params.g / (n_th * lam_hi)
    total = np.zeros_like(X)
    term = np.ones_like(X)
    for k in range(1, terms + 1):
        term = term * X / k
        total += (-1.0) ** (k + 1) * term / (k - nu)
    return (params.g / n_th) ** nu * total * X ** (-nu)


def _angular_norm(params: DecayParams, th):
    return np.exp(log_anisotropic_norm(np.cos(th), np.sin(th), params.alpha,
                                       params.beta, params.gamma))


def smeared_exponent(t: float, params: DecayParams,
                     U: Optional[ImpurityPotential] = None,
                     profile: Optional[VariationalProfile] = None,
                     tol: float = 1e-2, rule: InnerRule = InnerRule(),
                     grid: SmearedGrid = SmearedGrid(), workers: int = 1,
                     chunk: int = 1024, abs_tol: float = 1e-8) -> QuadResult:
    """``J(t) = int dx [1 - exp(-(delta_t * scaled U)(x))]``.

    ``tol`` is relative.  The error estimate combines the step-doubling
    difference of the outer trapezoid rule in ``xi`` with the fine/coarse
    difference of the inner product rule; a :class:`ResolutionWarning` is
    raised when it exceeds both ``tol * J`` and ``abs_tol``.  ``converged`` records the same test.
    """
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t!r}")
    if U is None:
        U = canonical_potential(params)
    if profile is None:
        profile = make_profile(params)
    eta = derive(params).eta
    nu = 3.0 / eta
    a, c = params.alpha, params.gamma
    n_cells = int(math.ceil((grid.xi_hi + grid.skin / nu) / grid.step))
    n_cells += n_cells % 2  # odd node count keeps the doubled-step rule aligned
    xi = grid.xi_hi - grid.step * np.arange(n_cells, -1, -1)
    th, wth = _theta_rule(params, grid.n_theta)
    XI, TH = np.meshgrid(xi, th, indexing="ij")
    lam = np.exp(XI)
    r = (lam ** (1.0 / a) * np.cos(TH)).ravel()
    z = (lam ** (1.0 / c) * np.sin(TH)).ravel()
    coarse = rule.coarse()

    def block(i):
        sl = slice(i, i + chunk)
        return (convolved_scaled_U(r[sl], z[sl], t, U, profile, rule),
                convolved_scaled_U(r[sl], z[sl], t, U, profile, coarse))

    starts = range(0, r.size, chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(block, starts))
    else:
        parts = [block(i) for i in starts]
    fine = np.concatenate([p[0] for p in parts]).reshape(XI.shape)
    crude = np.concatenate([p[1] for p in parts]).reshape(XI.shape)

    jac = 4.0 * math.pi * np.exp(nu * XI) * np.cos(TH) * (np.cos(TH) ** 2 / a + np.sin(TH) ** 2 / c)

    n_th = _angular_norm(params, th)
    ang = wth * np.cos(th) * (np.cos(th) ** 2 / a + np.sin(th) ** 2 / c)

    # the analytic tail assumes the declared decay g / ||x||; it is scaled per
    # angle by how the actual integrand compares with that model on the last row
    lam_last = math.exp(xi[-1])
    model = -np.expm1(-params.g / (lam_last * n_th))
    match = np.where(model > 0, -np.expm1(-fine[-1]) / np.where(model > 0, model, 1.0), 0.0)

    def tail(edge):
        return 4.0 * math.pi * math.fsum(ang * match * _tail(params, n_th, math.exp(edge)))

    def outer_sum(F, stride):
        # each node stands for a cell of width step*stride; the analytic
        # tail picks up after the last cell
        rows = (F * jac)[::stride] @ wth
        last = xi[::stride][-1]
        return grid.step * stride * math.fsum(rows) + tail(last + 0.5 * grid.step * stride)

    value = outer_sum(-np.expm1(-fine), 1)
    doubled = outer_sum(-np.expm1(-fine), 2)
    inner = outer_sum(-np.expm1(-crude), 1)
    # volume of the skipped core bounds its contribution
    core = 4.0 * math.pi / nu * math.exp(nu * (xi[0] - 0.5 * grid.step)) * math.fsum(ang)
    err = abs(value - doubled) + abs(value - inner) + core
    ok = err <= max(tol * abs(value), abs_tol)
    if not ok:
        warnings.warn(f"smeared exponent at t={t:g}: resolution error estimate "
                      f"{err:.3g} exceeds {tol:g} relative of {value:.6g}",
                      ResolutionWarning, stacklevel=2)
    return QuadResult(float(value), float(err), int(r.size) * (_rule_cost(rule) + _rule_cost(coarse)), bool(ok))


def _rule_cost(rule: InnerRule) -> int:
    return rule.n_long * rule.n_radial * rule.n_angle


def unsmeared_exponent(t: float, params: DecayParams,
                       U: Optional[ImpurityPotential] = None, tol: float = 1e-6) -> QuadResult:
    """``int (1 - exp(-scaled U)) = I_t / t^{3/eta}``, the Jensen lower bound of J."""
    if U is None:
        U = canonical_potential(params)
    res = I_t(U, t, tol)
    scale = t ** (-3.0 / derive(params).eta)
    return QuadResult(res.value * scale, res.abs_error_estimate * scale,
                      res.evaluations, res.converged)


# --------------------------------------------------------------------------
# the two bounds


def _log_sinhc(y: float) -> float:
    """``log(sinh(y) / y)`` without overflow or cancellation."""
    if y < 1e-3:
        y2 = y * y
        return y2 / 6.0 - y2 * y2 / 180.0
    return y - math.log(2.0) + math.log(-math.expm1(-2.0 * y)) - math.log(y)


def lower_bound_log(t: float, params: DecayParams,
                    U: Optional[ImpurityPotential] = None,
                    profile: Optional[VariationalProfile] = None,
                    J: Optional[QuadResult] = None, **kw) -> float:
    """``-(3/2) log(2 pi t) - t^{1-2 sigma} K - rho t^{3/eta} J(t)``."""
    if profile is None:
        profile = make_profile(params)
    if J is None:
        J = smeared_exponent(t, params, U, profile, **kw)
    eta = derive(params).eta
    return (-1.5 * math.log(2.0 * math.pi * t)
            - t ** (1.0 - 2.0 * profile.sigma) * profile.kinetic_phi
            - params.rho * t ** (3.0 / eta) * J.value)


def upper_bound_log(t: float, params: DecayParams,
                    U: Optional[ImpurityPotential] = None,
                    It: Optional[QuadResult] = None) -> float:
    """``log B - log(4 pi sqrt(2 pi t)) - log sinh(tB/2) + tB/2 - rho I_t``;
    continuous at ``B = 0`` where it becomes ``-(3/2) log(2 pi t) - rho I_t``."""
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t!r}")
    if U is None:
        U = canonical_potential(params)
    if It is None:
        It = I_t(U, t).require("I_t")
    y = 0.5 * t * params.B
    # B / sinh(y) = (2 / t) / sinhc(y)
    prefactor = (math.log(2.0 / t) - _log_sinhc(y) + y
                 - math.log(4.0 * math.pi * math.sqrt(2.0 * math.pi * t)))
    return prefactor - params.rho * It.value


# --------------------------------------------------------------------------
# Lemma-1 ratio


def lemma1_ratio(x, t: float, params: DecayParams,
                 U: Optional[ImpurityPotential] = None,
                 profile: Optional[VariationalProfile] = None,
                 rule: InnerRule = InnerRule(96, 24, 24)) -> float:
    """``(delta_t * scaled U)(x) / u(x)`` at a point ``x != 0``."""
    if U is None:
        U = canonical_potential(params)
    if profile is None:
        profile = make_profile(params)
    x = np.asarray(x, float)
    r, z = float(np.hypot(x[0], x[1])), float(abs(x[2]))
    if r == 0.0 and z == 0.0:
        raise DomainError("the ratio is undefined at the origin")
    conv = convolved_scaled_U(r, z, t, U, profile, rule)[0]
    check = convolved_scaled_U(r, z, t, U, profile, rule.coarse())[0]
    if abs(conv - check) > 1e-3 * abs(conv):
        warnings.warn(f"lemma1 ratio at t={t:g}: inner rule resolution {abs(conv - check) / conv:.2g}",
                      ResolutionWarning, stacklevel=2)
    return float(conv / u_limit_rz(r, z, params))


def lemma1_envelope(x, t: float, params: DecayParams,
                    profile: Optional[VariationalProfile] = None,
                    U: Optional[ImpurityPotential] = None,
                    mass: float = 1e-2) -> float:
    """Upper bound on :func:`lemma1_ratio` from splitting ``delta_t`` into a
    box around ``x`` and its complement.

    Inside the box the scaled potential is at most ``sup u`` over the box
    (``u`` decreases in ``r`` and ``z``); outside it is at most ``t g / eps``,
    and the box is chosen so the density mass outside is below
    ``mass * u(x) / (t g / eps)``.  The bound tends to 1 as ``t`` grows.
    """
    if U is None:
        U = canonical_potential(params)
    if profile is None:
        profile = make_profile(params)
    x = np.asarray(x, float)
    r, z = float(np.hypot(x[0], x[1])), float(abs(x[2]))
    ux = float(u_limit_rz(r, z, params))
    sup = U.sup_bound * t
    sd, w = _widths(t, params, profile)
    if math.isfinite(sup):
        p_out = min(1.0, mass * ux / sup)
        k = math.sqrt(-2.0 * math.log(p_out)) if p_out < 1.0 else 0.0
    else:
        p_out, k = 0.0, math.inf
    rmin = max(0.0, r - k * sd)
    zmin = max(0.0, z - w)
    inside = float(u_limit_rz(rmin, zmin, params))
    return (inside * (1.0 - p_out) + p_out * sup) / ux


# --------------------------------------------------------------------------
# sandwich curve


@dataclass(frozen=True)
class SandwichPoint:
    t: float
    lower_log: float
    upper_log: float
    scaled_lower: float
    scaled_upper: float
    J: float = math.nan
    J_error: float = math.nan
    I_t: float = math.nan

    @property
    def ordered(self) -> bool:
        return self.lower_log <= self.upper_log + 1e-3 * abs(self.upper_log)


def sandwich_point(t: float, params: DecayParams,
                   U: Optional[ImpurityPotential] = None,
                   profile: Optional[VariationalProfile] = None,
                   workers: int = 1, **kw) -> SandwichPoint:
    if U is None:
        U = canonical_potential(params)
    if profile is None:
        profile = make_profile(params)
    eta = derive(params).eta
    J = smeared_exponent(t, params, U, profile, workers=workers, **kw)
    It = I_t(U, t).require("I_t")
    lo = lower_bound_log(t, params, U, profile, J=J)
    up = upper_bound_log(t, params, U, It=It)
    scale = t ** (-3.0 / eta)
    return SandwichPoint(float(t), lo, up, lo * scale, up * scale,
                         J.value, J.abs_error_estimate, It.value)


def sandwich_curve(params: DecayParams, t_grid: Sequence[float],
                   U: Optional[ImpurityPotential] = None,
                   profile: Optional[VariationalProfile] = None,
                   workers: int = 1, **kw) -> list[SandwichPoint]:
    """One :class:`SandwichPoint` per ``t``; the grid is processed in order
    and ``workers`` parallelise the inner grid of each point."""
    if profile is None:
        profile = make_profile(params)
    return [sandwich_point(float(t), params, U, profile, workers=workers, **kw)
            for t in t_grid]
