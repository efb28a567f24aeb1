import math

import numpy as np
import pytest

from lifshits.errors import CertificateError, ResourceError
from lifshits.montecarlo import (
    MCConfig,
    campbell_laplace_mc,
    classical_idos_curve,
    classical_idos_free,
    classical_idos_mc,
    idos_laplace_check,
    sample_V,
)
from lifshits.params_model import DecayParams
from lifshits.potential import canonical_potential, certified_radius

ISO = DecayParams(1.0, 4.0, 4.0, 4.0, 1.0, 1.0)
SPARSE = DecayParams(1.0, 4.0, 4.0, 4.0, 0.05, 1.0)
FREE = DecayParams(1.0, 4.0, 4.0, 4.0, 0.0, 1.0)
T_SPARSE = 0.1


@pytest.fixture(scope="module")
def sparse_radius():
    return certified_radius(SPARSE, 0.9 * 1e-2 / T_SPARSE)


def test_free_idos_values():
    assert classical_idos_free(0.0) == 0.0
    assert classical_idos_free(1.0) == pytest.approx(0.04776326, abs=1e-8)
    assert classical_idos_free(4.0) == pytest.approx(8 * classical_idos_free(1.0), rel=1e-15)
    with pytest.raises(ValueError):
        classical_idos_free(-1.0)


def test_zero_time_gives_one():
    res = campbell_laplace_mc(None, ISO, 0.0, MCConfig(n_samples=5, radius=5.0))
    assert res.mean == 1.0 and res.std_err == 0.0


def test_vanishing_density_gives_one():
    p = DecayParams(1.0, 4.0, 4.0, 4.0, 1e-7, 1.0)
    res = campbell_laplace_mc(None, p, 1.0, MCConfig(seed=3, n_samples=200, radius=20.0))
    assert res.mean == pytest.approx(1.0, abs=1e-3)
    assert res.reference == pytest.approx(1.0, abs=1e-3)
    assert abs(res.z_score) <= 3.0


def test_campbell_binomial(sparse_radius):
    cfg0 = MCConfig(seed=0, n_samples=1000, radius=sparse_radius)
    hits = 0
    for seed in range(100):
        res = campbell_laplace_mc(None, SPARSE, T_SPARSE, MCConfig(seed, 1000, sparse_radius))
        assert res.tail_bound * T_SPARSE < 1e-2
        hits += abs(res.z_score) <= 3.0
    assert hits >= 99
    assert cfg0.radius == sparse_radius


def test_std_err_scales_with_sample_size(sparse_radius):
    a = campbell_laplace_mc(None, SPARSE, T_SPARSE, MCConfig(11, 500, sparse_radius))
    b = campbell_laplace_mc(None, SPARSE, T_SPARSE, MCConfig(11, 2000, sparse_radius))
    assert a.std_err / b.std_err == pytest.approx(2.0, rel=0.2)


def test_workers_give_identical_results(sparse_radius):
    a = campbell_laplace_mc(None, SPARSE, T_SPARSE, MCConfig(5, 700, sparse_radius, workers=1))
    b = campbell_laplace_mc(None, SPARSE, T_SPARSE, MCConfig(5, 700, sparse_radius, workers=4))
    assert a == b
    va = sample_V(canonical_potential(SPARSE), SPARSE.rho, MCConfig(5, 300, sparse_radius, workers=1))
    vb = sample_V(canonical_potential(SPARSE), SPARSE.rho, MCConfig(5, 300, sparse_radius, workers=3))
    assert np.array_equal(va, vb)


def test_campbell_refuses_without_certificate():
    with pytest.raises(CertificateError):
        campbell_laplace_mc(None, ISO, 10.0, MCConfig(n_samples=10, radius=5.0))


def test_point_cap():
    with pytest.raises(ResourceError):
        campbell_laplace_mc(None, ISO, 1e-4, MCConfig(n_samples=2, radius=50.0, point_cap=1000))


def test_idos_free_path_is_exact():
    res = classical_idos_mc(None, FREE, 1.0, MCConfig(n_samples=50, radius=10.0))
    assert res.mean == classical_idos_free(1.0)
    assert res.std_err == 0.0
    curve = classical_idos_curve(None, FREE, [0.5, 2.0, 7.0], MCConfig(n_samples=20, radius=3.0))
    assert [c.mean for c in curve] == [classical_idos_free(E) for E in (0.5, 2.0, 7.0)]


@pytest.fixture(scope="module")
def idos_curve():
    p = DecayParams(1.0, 4.0, 4.0, 4.0, 0.1, 1.0)
    R = certified_radius(p, 0.9 * 1e-2 * 1.0)
    return classical_idos_curve(None, p, [1.0, 2.0, 3.0, 5.0], MCConfig(seed=2, n_samples=60, radius=R))


def test_idos_below_free_and_monotone(idos_curve):
    for res in idos_curve:
        assert res.mean <= res.reference
    one, two = idos_curve[0], idos_curve[1]
    assert two.mean - one.mean > 3 * math.hypot(one.std_err, two.std_err)
    means = [r.mean for r in idos_curve]
    assert means == sorted(means)


def test_idos_certificate_refusal():
    p = DecayParams(1.0, 4.0, 4.0, 4.0, 0.1, 1.0)
    with pytest.raises(CertificateError):
        classical_idos_mc(None, p, 1.0, MCConfig(n_samples=5, radius=5.0))
    with pytest.raises(ValueError):
        classical_idos_curve(None, p, [0.0, 1.0], MCConfig(n_samples=5, radius=5.0))


@pytest.mark.slow
def test_idos_laplace_cross_check():
    p = DecayParams(1.0, 4.0, 4.0, 4.0, 0.01, 1.0)
    t = 5.0
    R = certified_radius(p, 0.9 * 1e-2 / t)
    transform, ref = idos_laplace_check(None, p, t, MCConfig(seed=1, n_samples=2000, radius=R))
    assert abs(transform / ref - 1.0) < 0.05


def test_config_validation():
    with pytest.raises(ValueError):
        MCConfig(n_samples=0)
    with pytest.raises(ValueError):
        MCConfig(radius=0.0)
    with pytest.raises(ValueError):
        MCConfig(workers=0)
