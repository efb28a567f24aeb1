import math

import numpy as np
import pytest

from lifshits.errors import ConvergenceError
from lifshits.numerics.quadrature import (
    QuadResult,
    integrate_1d,
    integrate_axisymmetric,
    integrate_halfline,
    integrate_spherical,
)


def test_gaussian_normalisation():
    res = integrate_axisymmetric(lambda r, z: np.exp(-(r * r + z * z) / 2), tol=1e-10)
    exact = (2 * math.pi) ** 1.5
    assert res.converged
    assert abs(res.value - exact) <= 10 * res.abs_error_estimate
    assert res.value == pytest.approx(15.7496099457, rel=1e-10)


def test_quarter_disk_indicator():
    # 4 pi int r dr dz over the unit quarter disk = 4 pi / 3 (unit ball volume)
    res = integrate_axisymmetric(lambda r, z: (r * r + z * z < 1).astype(float), tol=1e-6,
                                 z_break=lambda r: np.sqrt(np.clip(1 - r * r, 0, None)),
                                 r_break=1.0)
    assert res.value == pytest.approx(4 * math.pi / 3, rel=1e-6)


def test_error_contract_on_closed_forms():
    cases = [
        (lambda r, z: np.exp(-r - z), 4 * math.pi),
        (lambda r, z: 1.0 / (1 + r * r + z * z) ** 3, math.pi ** 2 / 4),
    ]
    for f, exact in cases:
        res = integrate_axisymmetric(f, tol=1e-9)
        assert res.converged
        assert abs(res.value - exact) <= 10 * res.abs_error_estimate


def test_one_dimensional_rules():
    res = integrate_1d(np.sin, 0.0, math.pi, abs_tol=1e-13)
    assert res.value == pytest.approx(2.0, abs=1e-13)
    res = integrate_halfline(lambda x: 1.0 / (1.0 + x * x), abs_tol=1e-12)
    assert res.value == pytest.approx(math.pi / 2, abs=1e-11)


def test_spherical_shell():
    res = integrate_spherical(lambda r, z: np.ones_like(r), 0.0, 2.0, tol=1e-10)
    assert res.value == pytest.approx(4 / 3 * math.pi * 8, rel=1e-12)
    tail = integrate_spherical(lambda r, z: (r * r + z * z) ** -2.0, 10.0, None, tol=1e-12)
    assert tail.value == pytest.approx(4 * math.pi / 10, rel=1e-8)


def test_bit_identical_reruns():
    f = lambda r, z: -np.expm1(-1.0 / (1e-300 + (r * r + z * z) ** 2))
    a = integrate_axisymmetric(f, tol=1e-7)
    b = integrate_axisymmetric(f, tol=1e-7)
    assert a == b


def test_budget_exhaustion_is_reported():
    res = integrate_1d(lambda x: np.sign(x - 0.3) * np.sqrt(np.abs(x - 0.3)), 0, 1,
                       abs_tol=1e-15, max_panels=3)
    assert not res.converged
    with pytest.raises(ConvergenceError):
        res.require("test integral")


def test_quadresult_require_passthrough():
    r = QuadResult(1.0, 0.0, 15, True)
    assert r.require() is r
