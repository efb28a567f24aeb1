"""Monte Carlo checks of the Poisson Laplace functional and the classical IDOS.

Every estimate draws configuration ``i`` from its own counter-based stream
``(seed, i)``, so results do not depend on how samples are spread over
workers.  Truncation certificates gate every run.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CertificateError
from .numerics.integrals import I_t_ball
from .params_model import DecayParams
from .potential import (
    DEFAULT_POINT_CAP,
    ImpurityPotential,
    V_at_origin,
    canonical_potential,
    sample_poisson,
    truncation_tail_bound,
)

IDOS_PREFACTOR = math.sqrt(2.0) / (3.0 * math.pi ** 2)
CAMPBELL_CERT = 1e-2  # required bound on t * tail
IDOS_CERT = 1e-2  # required bound on tail / E


@dataclass(frozen=True)
class MCConfig:
    seed: int = 0
    n_samples: int = 1000
    radius: float = 10.0
    workers: int = 1
    point_cap: int = DEFAULT_POINT_CAP

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class MCResult:
    mean: float
    std_err: float
    n: int
    tail_bound: float
    reference: float = math.nan

    @property
    def z_score(self) -> float:
        if self.std_err == 0.0:
            return 0.0 if self.mean == self.reference else math.copysign(math.inf, self.mean - self.reference)
        return (self.mean - self.reference) / self.std_err


def _stats(x: np.ndarray):
    # shifting by the first value keeps a constant sample exact
    x0 = float(x[0])
    d = x - x0
    mean = x0 + float(np.sum(d)) / x.size
    sd = float(np.std(d, ddof=1)) if x.size > 1 else 0.0
    return mean, sd / math.sqrt(x.size)


def sample_V(U: ImpurityPotential, rho: float, cfg: MCConfig, chunk: int = 256) -> np.ndarray:
    """``V(0)`` for configurations ``0 .. n_samples - 1``, in index order."""
    def block(i0):
        stop = min(i0 + chunk, cfg.n_samples)
        return np.array([
            V_at_origin(sample_poisson(cfg.radius, rho, cfg.seed, i, cfg.point_cap), U)
            for i in range(i0, stop)
        ])

    starts = range(0, cfg.n_samples, chunk)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(block, starts))
    else:
        parts = [block(i) for i in starts]
    return np.concatenate(parts)


def _U(U, params):
    return canonical_potential(params) if U is None else U


def campbell_laplace_mc(U: Optional[ImpurityPotential], params: DecayParams, t: float,
                        cfg: MCConfig) -> MCResult:
    """Estimate ``E[exp(-t V(0))]`` for impurities in the ball of ``cfg.radius``.

    The reference is ``exp(-rho int_{|x|<R} (1 - exp(-t U)))``, the exact
    Laplace functional of the truncated process.  The run is refused unless
    ``t * tail < 1e-2``, i.e. the omitted impurities change the infinite-
    volume value by less than about 1%.
    """
    if not t >= 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    U = _U(U, params)
    tail = truncation_tail_bound(cfg.radius, params, U)
    if t * tail >= CAMPBELL_CERT:
        raise CertificateError(
            f"truncation certificate fails: t * tail = {t * tail:.3g} >= {CAMPBELL_CERT:g} "
            f"at R = {cfg.radius:g}"
        )
    if t == 0:
        return MCResult(1.0, 0.0, cfg.n_samples, tail, 1.0)
    V = sample_V(U, params.rho, cfg)
    mean, se = _stats(np.exp(-t * V))
    ref = math.exp(-params.rho * I_t_ball(U, t, cfg.radius).require("ball-restricted I_t").value)
    return MCResult(mean, se, cfg.n_samples, tail, ref)


def classical_idos_free(E: float) -> float:
    """``(sqrt 2 / 3 pi^2) E^{3/2}``."""
    if E < 0:
        raise ValueError(f"E must be >= 0, got {E!r}")
    return IDOS_PREFACTOR * E ** 1.5


def _idos_from_V(V: np.ndarray, E: float):
    # the square-root factor is read as vanishing together with max(E - V, 0);
    # factoring out the free value keeps V = 0 exact
    if E == 0:
        return 0.0, 0.0
    return _stats(classical_idos_free(E) * np.maximum(1.0 - V / E, 0.0) ** 1.5)


def classical_idos_curve(U: Optional[ImpurityPotential], params: DecayParams,
                         E_grid: Sequence[float], cfg: MCConfig) -> list[MCResult]:
    """Classical IDOS on an energy grid from one shared set of configurations.

    The certificate ``tail <= 1e-2 E`` is checked at the smallest energy.
    """
    E_grid = [float(E) for E in E_grid]
    if not E_grid or min(E_grid) <= 0:
        raise ValueError("E_grid must be non-empty and positive")
    U = _U(U, params)
    tail = truncation_tail_bound(cfg.radius, params, U)
    if tail > IDOS_CERT * min(E_grid):
        raise CertificateError(
            f"truncation certificate fails: tail = {tail:.3g} > {IDOS_CERT:g} * E "
            f"at E = {min(E_grid):g}, R = {cfg.radius:g}"
        )
    V = sample_V(U, params.rho, cfg)
    out = []
    for E in E_grid:
        mean, se = _idos_from_V(V, E)
        out.append(MCResult(mean, se, cfg.n_samples, tail, classical_idos_free(E)))
    return out


def classical_idos_mc(U: Optional[ImpurityPotential], params: DecayParams, E: float,
                      cfg: MCConfig) -> MCResult:
    """``(sqrt 2 / 3 pi^2) E[max(E - V(0), 0)^{3/2}]``; ``reference`` holds the
    free value."""
    return classical_idos_curve(U, params, [E], cfg)[0]


def idos_laplace_check(U: Optional[ImpurityPotential], params: DecayParams, t: float,
                       cfg: MCConfig, E_max: Optional[float] = None, n_grid: int = 4001):
    """Laplace transform ``t int exp(-t E) N_cl(E) dE`` of the Monte Carlo
    IDOS curve by the trapezoid rule, against ``(2 pi t)^{-3/2}`` times the
    ball-restricted Laplace functional.

    The whole energy range enters, so the Laplace-domain certificate
    ``t * tail < 1e-2`` is used.  Returns ``(transform, reference)``.
    """
    U = _U(U, params)
    tail = truncation_tail_bound(cfg.radius, params, U)
    if t * tail >= CAMPBELL_CERT:
        raise CertificateError(f"truncation certificate fails: t * tail = {t * tail:.3g}")
    if E_max is None:
        E_max = 60.0 / t
    V = np.sort(sample_V(U, params.rho, cfg))
    E = np.linspace(0.0, E_max, n_grid)
    N = np.array([_idos_from_V(V, e)[0] for e in E])
    f = t * np.exp(-t * E) * N
    transform = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(E)))
    ref = (2.0 * math.pi * t) ** -1.5 * math.exp(
        -params.rho * I_t_ball(U, t, cfg.radius).require("ball-restricted I_t").value)
    return transform, ref
