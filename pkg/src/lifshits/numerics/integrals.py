"""The two volume integrals behind the Laplace-domain asymptotics:
``I_inf = int (1 - exp(-u))`` and ``I_t = int (1 - exp(-t U))``."""

from __future__ import annotations

import numpy as np

from ..params_model import DecayParams, _require_eta
from ..potential import ImpurityPotential, u_limit_rz
from .quadrature import QuadResult, integrate_axisymmetric, integrate_spherical


def _powers(params: DecayParams):
    """Compactification powers making the mapped integrands vanish at the
    far end: the outer integrand decays like ``r^{1 + a/g - a}``, the inner
    like ``z^{-g}``."""
    a, c = params.alpha, params.gamma
    kappa = a - a / c - 2.0
    return max(1.0, 2.0 / kappa), max(1.0, 2.0 / (c - 1.0))


def _crease(params: DecayParams):
    # r^alpha = z^gamma, where the pseudo-norm switches its dominant term
    a, c = params.alpha, params.gamma

    def z_break(r):
        return np.asarray(r, float) ** (a / c)

    return z_break


def I_infinity(params: DecayParams, tol: float = 1e-7) -> QuadResult:
    """``int (1 - exp(-u(x))) dx`` (no ``rho`` factor), absolute ``tol``."""
    _require_eta(params)
    Lr = params.g ** (1.0 / params.alpha)
    Lz = params.g ** (1.0 / params.gamma)

    def f(r, z):
        with np.errstate(over="ignore"):
            return -np.expm1(-u_limit_rz(r, z, params))

    pr, pz = _powers(params)
    return integrate_axisymmetric(f, tol=tol, scale_r=Lr, scale_z=Lz,
                                  z_break=_crease(params), max_panels=800,
                                  power_r=pr, power_z=pz)


def _t_scales(U: ImpurityPotential, t: float):
    p = U.params
    m = max(t * p.g, p.epsilon)
    return m ** (1.0 / p.alpha), m ** (1.0 / p.gamma)


def I_t(U: ImpurityPotential, t: float, tol: float = 1e-6) -> QuadResult:
    """``int (1 - exp(-t U(x))) dx``, relative tolerance ``tol``."""
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t!r}")
    Lr, Lz = _t_scales(U, t)

    def f(r, z):
        return -np.expm1(-t * U.rz(r, z))

    pr, pz = _powers(U.params)
    return integrate_axisymmetric(f, tol=1e-300, rel_tol=tol, scale_r=Lr, scale_z=Lz,
                                  z_break=_crease(U.params), max_panels=800,
                                  power_r=pr, power_z=pz)


def I_t_ball(U: ImpurityPotential, t: float, R: float, tol: float = 1e-8) -> QuadResult:
    """``int_{|x| < R} (1 - exp(-t U(x))) dx``, relative tolerance ``tol``."""
    if not (t >= 0 and R > 0):
        raise ValueError(f"need t >= 0 and R > 0, got t={t!r}, R={R!r}")
    if t == 0:
        return QuadResult(0.0, 0.0, 0, True)

    def f(r, z):
        return -np.expm1(-t * U.rz(r, z))

    return integrate_spherical(f, 0.0, R, tol=1e-300, rel_tol=tol)
