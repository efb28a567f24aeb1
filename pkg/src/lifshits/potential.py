"""Single-impurity profiles, the scaling limit ``u`` and Poisson sampling.

All profiles are axisymmetric about the field axis and even in ``x_3``, so
they are evaluated on ``(r, z) = (|x_perp|, |x_3|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, ResourceError
from .numerics.quadrature import integrate_spherical
from .params_model import DecayParams

DEFAULT_POINT_CAP = 10_000_000
_MASK64 = (1 << 64) - 1


def pseudo_norm(c, beta: float):
    """``(|c1|^{2/beta} + |c2|^{2/beta})^{beta/2}``, ``max(|c1|, |c2|)`` at beta=0.

    ``c`` has shape ``(2, ...)``.  The larger component is factored out so
    no intermediate power overflows.
    """
    c1 = np.abs(np.asarray(c[0], float))
    c2 = np.abs(np.asarray(c[1], float))
    big = np.maximum(c1, c2)
    if beta == 0:
        return big
    small = np.minimum(c1, c2)
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        q = np.where(big > 0, small / big, 0.0)
        out = big * np.exp(0.5 * beta * np.log1p(q ** (2.0 / beta)))
    return out


def log_anisotropic_norm(r, z, alpha: float, beta: float, gamma: float):
    """``log || (r^alpha, |z|^gamma) ||_{2/beta}``, evaluated in log domain.

    Finite for any finite ``(r, z) != 0``; ``-inf`` at the origin.
    """
    r = np.asarray(r, float)
    z = np.abs(np.asarray(z, float))
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        lr = alpha * np.log(r)
        lz = gamma * np.log(z)
        hi = np.maximum(lr, lz)
        if beta == 0:
            return hi
        lo = np.minimum(lr, lz)
        corr = 0.5 * beta * np.log1p(np.exp((2.0 / beta) * (lo - hi)))
        return np.where(np.isfinite(hi), hi + np.nan_to_num(corr), hi)


def _rz(x):
    x = np.asarray(x, float)
    return np.hypot(x[..., 0], x[..., 1]), np.abs(x[..., 2])


def u_limit_rz(r, z, params: DecayParams):
    # same rounding path as canonical_rz, so U <= u holds exactly in floats
    with np.errstate(over="ignore", divide="ignore"):
        n = np.exp(log_anisotropic_norm(r, z, params.alpha, params.beta, params.gamma))
        return params.g / n


def u_limit(x, params: DecayParams):
    """``g / ||(|x_perp|^alpha, |x_3|^gamma)||_{2/beta}``; ``inf`` at the origin."""
    r, z = _rz(x)
    return u_limit_rz(r, z, params)


def canonical_rz(r, z, params: DecayParams):
    with np.errstate(over="ignore"):
        n = np.exp(log_anisotropic_norm(r, z, params.alpha, params.beta, params.gamma))
    return params.g / (params.epsilon + n)


def canonical_U(x, params: DecayParams):
    """``g / (epsilon + ||(|x_perp|^alpha, |x_3|^gamma)||_{2/beta})``."""
    r, z = _rz(x)
    return canonical_rz(r, z, params)


KINDS = ("canonical_regularized", "scaling_limit", "user_supplied")


@dataclass(frozen=True)
class ImpurityPotential:
    """An evaluable single-impurity profile with its declared decay data.

    ``profile(r, z)`` is required for ``kind="user_supplied"``; it must be
    vectorised, nonnegative, and correspond to a potential that is
    axisymmetric and even in ``x_3``.
    """

    params: DecayParams
    kind: str = "canonical_regularized"
    profile: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "user_supplied" and self.profile is None:
            raise ValueError("user_supplied potentials need a profile(r, z)")

    def rz(self, r, z):
        if self.kind == "canonical_regularized":
            return canonical_rz(r, z, self.params)
        if self.kind == "scaling_limit":
            return u_limit_rz(r, z, self.params)
        return np.asarray(self.profile(np.asarray(r, float), np.abs(np.asarray(z, float))), float)

    def __call__(self, x):
        r, z = _rz(x)
        return self.rz(r, z)

    def scaled_rz(self, t: float, r, z):
        """``t U(t^{1/alpha} r, t^{1/gamma} z)``."""
        p = self.params
        # homogeneity: ||D_t x|| = t ||x|| with D_t = diag(t^{1/a}, t^{1/a}, t^{1/g})
        if self.kind == "scaling_limit":
            return u_limit_rz(r, z, p)
        if self.kind == "canonical_regularized":
            with np.errstate(over="ignore"):
                n = np.exp(log_anisotropic_norm(r, z, p.alpha, p.beta, p.gamma))
            return p.g / (p.epsilon / t + n)
        r = np.asarray(r, float)
        z = np.asarray(z, float)
        return t * self.rz(t ** (1.0 / p.alpha) * r, t ** (1.0 / p.gamma) * z)

    @property
    def sup_bound(self) -> float:
        if self.kind == "canonical_regularized":
            return self.params.g / self.params.epsilon
        return math.inf


def canonical_potential(params: DecayParams) -> ImpurityPotential:
    return ImpurityPotential(params, "canonical_regularized")


def limit_potential(params: DecayParams) -> ImpurityPotential:
    return ImpurityPotential(params, "scaling_limit")


def scaled_U(t: float, x, U: ImpurityPotential):
    """``t U(t^{1/alpha} x_perp, t^{1/gamma} x_3)`` at 3-space points ``x``."""
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t!r}")
    r, z = _rz(x)
    return U.scaled_rz(t, r, z)


# --------------------------------------------------------------------------
# Poisson point process in a ball


def rng_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator for draw stream ``index`` under ``seed``.

    Philox is keyed by the 128-bit integer ``seed + 2^64 index``, so every
    ``(seed, index)`` pair owns an independent, platform-stable stream.
    """
    key = (int(seed) & _MASK64) | ((int(index) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class PoissonSample:
    points: np.ndarray
    radius: float
    intensity: float
    seed: int
    index: int = 0

    @property
    def count(self) -> int:
        return int(self.points.shape[0])


def ball_volume(R: float) -> float:
    return 4.0 / 3.0 * math.pi * R ** 3


def sample_poisson(R: float, rho: float, seed: int, index: int = 0,
                   cap: int = DEFAULT_POINT_CAP) -> PoissonSample:
    """Poisson configuration of intensity ``rho`` in the ball of radius ``R``."""
    if not (R > 0 and rho >= 0):
        raise ValueError(f"need R > 0 and rho >= 0, got R={R!r}, rho={rho!r}")
    lam = rho * ball_volume(R)
    if lam > cap:
        raise ResourceError(f"expected point count {lam:.3g} exceeds cap {cap:.3g}")
    rng = rng_stream(seed, index)
    n = int(rng.poisson(lam))
    u = rng.random((n, 3))
    rad = R * np.cbrt(u[:, 0])
    cos_t = 2.0 * u[:, 1] - 1.0
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t * cos_t))
    phi = 2.0 * math.pi * u[:, 2]
    pts = np.column_stack([rad * sin_t * np.cos(phi), rad * sin_t * np.sin(phi), rad * cos_t])
    return PoissonSample(pts, float(R), float(rho), int(seed), int(index))


def V_at_origin(sample: PoissonSample, U: ImpurityPotential) -> float:
    """``sum_j U(p_j)``; by evenness of ``U`` this is ``V(0)``."""
    if sample.count == 0:
        return 0.0
    return float(np.sum(U(sample.points)))


def truncation_tail_bound(R: float, params: DecayParams,
                          U: Optional[ImpurityPotential] = None) -> float:
    """``rho * int_{|x| > R} U``: mean contribution to ``V(0)`` of the impurities
    left out of a sampling ball of radius ``R``."""
    if U is None:
        U = canonical_potential(params)
    if params.rho == 0:
        return 0.0
    res = integrate_spherical(U.rz, R, None, tol=1e-300, rel_tol=1e-8, scale=R)
    if not res.converged or not math.isfinite(res.value):
        raise ConvergenceError(f"tail integral beyond R={R} did not converge: {res}")
    return params.rho * res.value


def certified_radius(params: DecayParams, tol: float,
                     U: Optional[ImpurityPotential] = None,
                     r_max: float = 1e8) -> float:
    """Smallest radius (to 0.1%) whose truncation tail bound is below ``tol``."""
    if truncation_tail_bound(1.0, params, U) <= tol:
        return 1.0
    lo, hi = 1.0, 2.0
    while truncation_tail_bound(hi, params, U) > tol:
        lo, hi = hi, 2.0 * hi
        if hi > r_max:
            raise ConvergenceError(f"no radius below {r_max:g} certifies tail tolerance {tol:g}")
    while hi / lo > 1.001:
        mid = math.sqrt(lo * hi)
        if truncation_tail_bound(mid, params, U) <= tol:
            hi = mid
        else:
            lo = mid
    return hi
