"""Adaptive Gauss-Kronrod quadrature on compactified half-lines.

Every integrand in this package depends on a point of 3-space only through
``(|x_perp|, |x_3|)``, so volume integrals reduce to

    4 pi * int_0^inf int_0^inf r f(r, z) dr dz.

Both half-lines are mapped to the unit interval by ``r = L s / (1 - s)``.
The inner integrals belonging to all outer nodes of a refinement sweep are
integrated together by :func:`batched_gk`, which keeps the Python overhead
per sweep constant.  Panels are kept sorted by position, so sums are always
accumulated in the same order and repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ConvergenceError

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 nodes on [-1, 1] with Kronrod and embedded Gauss weights.
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
W_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
W_GAUSS = np.zeros(15)
W_GAUSS[1:7:2] = _WG[:3]
W_GAUSS[7] = _WG[3]
W_GAUSS[9:15:2] = _WG[2::-1]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool

    def require(self, what: str = "quadrature") -> "QuadResult":
        if not self.converged:
            raise ConvergenceError(
                f"{what} did not converge: value={self.value!r}, "
                f"error estimate={self.abs_error_estimate!r}"
            )
        return self


def batched_gk(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    lower: np.ndarray,
    upper: np.ndarray,
    abs_tol: np.ndarray,
    rel_tol: float = 0.0,
    breakpoints: Optional[np.ndarray] = None,
    max_panels: int = 400,
):
    """Integrate ``m`` one-dimensional integrands simultaneously.

    ``f(ids, x)`` evaluates integrand ``ids[k]`` at abscissa ``x[k]``.
    ``breakpoints`` is an optional ``(m,)`` array of interior split points
    (NaN where none).  Returns ``(values, errors, evaluations, converged)``
    with per-integrand arrays.
    """
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    m = lower.size
    abs_tol = np.broadcast_to(np.asarray(abs_tol, float), (m,))
    ids = np.arange(m)
    lo, hi, pid = lower.copy(), upper.copy(), ids.copy()
    if breakpoints is not None:
        bp = np.asarray(breakpoints, float)
        ok = np.isfinite(bp) & (bp > lower) & (bp < upper)
        lo = np.concatenate([lower, bp[ok]])
        hi = np.concatenate([np.where(ok, bp, upper), upper[ok]])
        pid = np.concatenate([ids, ids[ok]])
    order = np.lexsort((lo, pid))
    lo, hi, pid = lo[order], hi[order], pid[order]
    val, err = _panels(f, pid, lo, hi)
    nevals = 15 * lo.size
    npanels = np.bincount(pid, minlength=m)
    while True:
        tot = np.bincount(pid, weights=val, minlength=m)
        tot_err = np.bincount(pid, weights=err, minlength=m)
        target = np.maximum(abs_tol, rel_tol * np.abs(tot))
        active = (tot_err > target) & (npanels < max_panels)
        if not active.any():
            break
        worst = np.zeros(m)
        np.maximum.at(worst, pid, err)
        width_ok = (hi - lo) > 64 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        sel = active[pid] & (err >= 0.25 * worst[pid]) & width_ok
        if not sel.any():
            break
        mid = 0.5 * (lo[sel] + hi[sel])
        new_lo = np.concatenate([lo[sel], mid])
        new_hi = np.concatenate([mid, hi[sel]])
        new_pid = np.concatenate([pid[sel], pid[sel]])
        nv, ne = _panels(f, new_pid, new_lo, new_hi)
        nevals += 15 * new_lo.size
        keep = ~sel
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        pid = np.concatenate([pid[keep], new_pid])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        order = np.lexsort((lo, pid))
        lo, hi, pid, val, err = lo[order], hi[order], pid[order], val[order], err[order]
        npanels = np.bincount(pid, minlength=m)
    tot = np.bincount(pid, weights=val, minlength=m)
    tot_err = np.bincount(pid, weights=err, minlength=m)
    converged = tot_err <= np.maximum(abs_tol, rel_tol * np.abs(tot))
    return tot, tot_err, nevals, converged


def _panels(f, pid, lo, hi):
    half = 0.5 * (hi - lo)
    centre = 0.5 * (hi + lo)
    x = centre[:, None] + half[:, None] * NODES[None, :]
    ids = np.broadcast_to(pid[:, None], x.shape)
    fx = np.asarray(f(ids.ravel(), x.ravel()), float).reshape(x.shape)
    kron = half * (fx @ W_KRONROD)
    gauss = half * (fx @ W_GAUSS)
    resabs = np.abs(half) * (np.abs(fx) @ W_KRONROD)
    err = np.maximum(np.abs(kron - gauss), 50 * _EPS * resabs)
    return kron, err


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    abs_tol: float = 1e-10,
    rel_tol: float = 0.0,
    breakpoints: Sequence[float] = (),
    max_panels: int = 2000,
) -> QuadResult:
    """Adaptive Gauss-Kronrod (7, 15) on a finite interval."""
    pts = sorted(p for p in breakpoints if a < p < b)
    edges = [a, *pts, b]
    vals, errs, nev, conv = batched_gk(
        lambda ids, x: f(x),
        np.array(edges[:-1]),
        np.array(edges[1:]),
        abs_tol=np.full(len(edges) - 1, abs_tol / (len(edges) - 1)),
        rel_tol=rel_tol,
        max_panels=max_panels,
    )
    value = math.fsum(vals)
    return QuadResult(value, float(errs.sum()), nev, bool(conv.all()))


def integrate_halfline(
    f: Callable[[np.ndarray], np.ndarray],
    scale: float = 1.0,
    abs_tol: float = 1e-10,
    rel_tol: float = 0.0,
    breakpoints: Sequence[float] = (),
    max_panels: int = 2000,
) -> QuadResult:
    """``int_0^inf f(x) dx`` via ``x = scale * s / (1 - s)``."""

    def g(s):
        x = scale * s / (1.0 - s)
        return f(x) * scale / (1.0 - s) ** 2

    bps = [p / (scale + p) for p in breakpoints if p > 0]
    return integrate_1d(g, 0.0, 1.0, abs_tol, rel_tol, bps, max_panels)


def _compactify(L: float, p: float):
    """``x = L (s / (1 - s))^p`` with its Jacobian; ``p > 1`` flattens
    slowly decaying algebraic tails near ``s = 1``."""

    def m(s):
        s = np.asarray(s, float)
        inside = s < 1.0
        sc = np.where(inside, s, 0.5)
        q = sc / (1.0 - sc)
        x = L * q ** p
        jac = L * p * q ** (p - 1.0) / (1.0 - sc) ** 2
        return np.where(inside, x, np.inf), np.where(inside, jac, 0.0)

    def inverse(x):
        q = (np.asarray(x, float) / L) ** (1.0 / p)
        return q / (1.0 + q)

    return m, inverse


def integrate_axisymmetric(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    tol: float = 1e-7,
    rel_tol: float = 0.0,
    scale_r: float = 1.0,
    scale_z: float = 1.0,
    z_break: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    r_break: Optional[float] = None,
    max_panels: int = 600,
    power_r: float = 1.0,
    power_z: float = 1.0,
) -> QuadResult:
    """``4 pi int_0^inf int_0^inf r f(r, z) dr dz`` for vectorised ``f``.

    ``tol`` is absolute; with ``rel_tol > 0`` a pilot pass fixes the
    magnitude and the target becomes ``max(tol, rel_tol * |pilot|)``.
    ``z_break(r)`` is an interior split point of the inner integral (a
    crease of the integrand), ``r_break`` one of the outer integral.
    ``f`` must vanish at infinity; it is never evaluated there.
    """
    rmap, rinv = _compactify(float(scale_r), float(power_r))
    zmap, zinv = _compactify(1.0, float(power_z))

    def zscale(r):
        # follow the crease so the inner structure stays at w ~ 1/2
        if z_break is None:
            return np.full_like(r, float(scale_z))
        return np.maximum(float(scale_z), np.asarray(z_break(r), float))

    def outer_map(s):
        r, jac = rmap(s)
        return r, 4.0 * math.pi * np.where(jac > 0, r, 0.0) * jac

    def inner_map(r, w):
        z, jac = zmap(w)
        L = zscale(r)
        return L * z, L * jac

    def g(r, z):
        out = np.zeros(np.broadcast(r, z).shape)
        ok = np.isfinite(r) & np.isfinite(z)
        out[ok] = f(r[ok], z[ok])
        return out

    inner_break = None
    if z_break is not None:
        def inner_break(r):
            return zinv(np.asarray(z_break(r), float) / zscale(r))

    outer_breaks = () if r_break is None else (float(rinv(r_break)),)
    return nested_gk(g, outer_map, (0.0, 1.0), inner_map, lambda r: np.ones_like(r),
                     tol, rel_tol, inner_break, outer_breaks, max_panels)


def integrate_spherical(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    radius_lo: float = 0.0,
    radius_hi: Optional[float] = None,
    tol: float = 1e-7,
    rel_tol: float = 0.0,
    scale: float = 1.0,
    theta_break: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    max_panels: int = 600,
) -> QuadResult:
    """Volume integral of an axisymmetric ``f(r, z)`` over a spherical shell
    ``radius_lo <= |x| < radius_hi`` (``None`` meaning infinity), in polar
    coordinates ``r = p sin(th)``, ``z = p cos(th)``, ``th in [0, pi/2]``."""
    a = float(radius_lo)
    if radius_hi is None:
        def outer_map(s):
            p = a + scale * s / (1.0 - s)
            return p, 4.0 * math.pi * p * p * scale / (1.0 - s) ** 2
    else:
        span = float(radius_hi) - a

        def outer_map(s):
            p = a + span * s
            return p, 4.0 * math.pi * p * p * span

    def inner_map(p, th):
        return th, np.sin(th)

    def g(p, th):
        return f(p * np.sin(th), p * np.cos(th))

    return nested_gk(g, outer_map, (0.0, 1.0), inner_map,
                     lambda p: np.full_like(p, 0.5 * math.pi), tol, rel_tol,
                     theta_break, (), max_panels)


def nested_gk(f, outer_map, outer_range, inner_map, inner_upper, tol,
              rel_tol=0.0, inner_break=None, outer_breaks=(), max_panels=600):
    """Nested adaptive quadrature of ``int ds J(s) int_0^{w_hi} dw K f``.

    ``outer_map(s) -> (x, J)`` and ``inner_map(x, w) -> (y, K)`` carry the
    coordinate changes, ``f(x, y)`` the integrand.  Inner errors are
    propagated into the outer panel error estimates.
    """
    if rel_tol > 0.0:
        pilot = _nested(f, outer_map, outer_range, inner_map, inner_upper,
                        max(tol, 1e-300), 1e-3, inner_break, outer_breaks, max_panels)
        target = max(tol, rel_tol * abs(pilot.value))
        res = _nested(f, outer_map, outer_range, inner_map, inner_upper, target,
                      0.0, inner_break, outer_breaks, max_panels)
        return QuadResult(res.value, res.abs_error_estimate,
                          res.evaluations + pilot.evaluations, res.converged)
    return _nested(f, outer_map, outer_range, inner_map, inner_upper, tol, 0.0,
                   inner_break, outer_breaks, max_panels)


def _nested(f, outer_map, outer_range, inner_map, inner_upper, tol, rel_tol,
            inner_break, outer_breaks, max_panels):
    inner_share = 0.2
    evaluations = 0
    all_conv = True

    def outer(s):
        nonlocal evaluations, all_conv
        x, jac = outer_map(s)
        bp = None if inner_break is None else inner_break(x)

        def g(ids, w):
            y, k = inner_map(x[ids], w)
            return f(x[ids], y) * k

        # the inner tolerance is shared among outer nodes via their weights
        atol = inner_share * tol / np.maximum(np.abs(jac), 1e-300)
        vals, errs, nev, conv = batched_gk(
            g, np.zeros_like(x), inner_upper(x), atol, rel_tol, bp, max_panels
        )
        evaluations += nev
        all_conv = all_conv and bool(conv.all())
        return jac * vals, np.abs(jac) * errs

    a, b = outer_range
    edges = [a, *sorted(p for p in outer_breaks if a < p < b), b]
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    val, err = _outer_panels(outer, lo, hi)
    while True:
        total = math.fsum(val)
        target = max(tol, rel_tol * abs(total)) * (1.0 - inner_share)
        if err.sum() <= target or lo.size >= max_panels:
            break
        width_ok = (hi - lo) > 64 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        sel = (err >= 0.25 * err.max()) & width_ok
        if not sel.any():
            break
        mid = 0.5 * (lo[sel] + hi[sel])
        nlo = np.concatenate([lo[sel], mid])
        nhi = np.concatenate([mid, hi[sel]])
        nv, ne = _outer_panels(outer, nlo, nhi)
        keep = ~sel
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        order = np.argsort(lo, kind="stable")
        lo, hi, val, err = lo[order], hi[order], val[order], err[order]
    total = math.fsum(val)
    total_err = float(err.sum())
    converged = all_conv and total_err <= max(tol, rel_tol * abs(total))
    return QuadResult(total, total_err, evaluations, converged)


def _outer_panels(outer, lo, hi):
    half = 0.5 * (hi - lo)
    centre = 0.5 * (hi + lo)
    s = (centre[:, None] + half[:, None] * NODES[None, :]).ravel()
    fx, inner_err = outer(s)
    fx = fx.reshape(lo.size, 15)
    inner_err = inner_err.reshape(lo.size, 15)
    kron = half * (fx @ W_KRONROD)
    gauss = half * (fx @ W_GAUSS)
    resabs = half * (np.abs(fx) @ W_KRONROD)
    err = np.maximum(np.abs(kron - gauss), 50 * _EPS * resabs)
    err = err + half * (inner_err @ W_KRONROD)
    return kron, err
