import math

import numpy as np
import pytest

from lifshits.asymptotics import (
    DEFAULT_ORACLE_GRID,
    consistency_report,
    extrapolate_limit,
    oracle_limit,
    scaled_log_curve,
    tauberian_forward_oracle,
)
from lifshits.bounds import upper_bound_log
from lifshits.errors import FitError
from lifshits.numerics.special import gamma
from lifshits.params_model import DecayParams, lifshits_constant_legendre, saddle_forward

ISO = DecayParams(1.0, 4.0, 4.0, 4.0, 1.0, 1.0)
ISO_LIMIT = 4 * math.pi / 3 * gamma(0.25)


def test_scaled_curve_of_pure_power_is_constant():
    a, eta = 2.5, 4.0
    rows = scaled_log_curve(lambda t: -a * t ** 0.75, [1.0, 10.0, 1e3], eta)
    assert [r[1] for r in rows] == pytest.approx([-a] * 3, rel=1e-14)


def test_scaled_curve_with_log_correction():
    a, c, eta = 2.5, 3.0, 4.0
    rows = scaled_log_curve(lambda t: -a * t ** 0.75 + c * math.log(t), [1e2, 1e4, 1e6, 1e8], eta)
    for t, y in rows:
        assert y + a == pytest.approx(c * math.log(t) / t ** 0.75, rel=1e-9)


def test_scaled_curve_rejects_bad_grid():
    with pytest.raises(ValueError):
        scaled_log_curve(lambda t: t, [1.0, 1.0, 2.0], 4.0)
    with pytest.raises(ValueError):
        scaled_log_curve(lambda t: t, [-1.0, 2.0], 4.0)


def test_scaled_upper_bound_at_large_t():
    rows = scaled_log_curve(lambda t: upper_bound_log(t, ISO), [1e3, 1e6], 4.0)
    assert abs(rows[-1][1] / -ISO_LIMIT - 1) < 0.05


def test_extrapolate_exact_power():
    ts = np.logspace(1, 6, 9)
    est = extrapolate_limit([(t, 2 - t ** -0.5) for t in ts])
    assert est.value == pytest.approx(2.0, abs=1e-6)
    assert est.points_used == 9 and est.error_estimate >= 0


def test_extrapolate_constant_data():
    est = extrapolate_limit([(10.0, 3.0), (100.0, 3.0), (1000.0, 3.0)])
    assert est.value == 3.0 and est.error_estimate == 0.0


def test_extrapolate_errors():
    with pytest.raises(FitError):
        extrapolate_limit([(10.0, 1.0), (1000.0, 2.0)])
    with pytest.raises(FitError):
        extrapolate_limit([(10.0, 1.0), (20.0, 2.0), (90.0, 3.0)])
    # non-finite data leaves no usable residual
    with pytest.raises(FitError):
        extrapolate_limit([(10.0, 1.0), (100.0, math.nan), (1000.0, 3.0)])


def test_extrapolated_upper_curve():
    pts = [(t, upper_bound_log(t, ISO) / t ** 0.75) for t in (1e3, 1e4, 1e5, 1e6)]
    est = extrapolate_limit(pts, eta=4.0)
    assert abs(est.value / -ISO_LIMIT - 1) < 0.02


def test_oracle_saddle_value():
    rows = tauberian_forward_oracle(1.0, 3.0, [1e6])
    assert rows[0][2] == pytest.approx(4 * 3 ** -0.75, rel=1e-2)
    assert 4 * 3 ** -0.75 == pytest.approx(1.75477, abs=1e-5)


def test_oracle_mu_one():
    est = oracle_limit(1.0, 1.0)
    assert est.value == pytest.approx(2.0, rel=1e-2)


def test_oracle_scaling_in_C():
    lam = 7.0
    a = tauberian_forward_oracle(1.3, 2.0, [1e6])[0][2]
    b = tauberian_forward_oracle(lam * 1.3, 2.0, [1e6])[0][2]
    assert b / a == pytest.approx(lam ** (1 / 3), rel=1e-2)


def test_oracle_rejects_bad_arguments():
    with pytest.raises(ValueError):
        tauberian_forward_oracle(0.0, 1.0, [1.0])
    with pytest.raises(ValueError):
        tauberian_forward_oracle(1.0, -1.0, [1.0])


def test_oracle_matches_saddle_for_random_parameters():
    rng = np.random.default_rng(20261014)
    for C, mu in zip(rng.uniform(0.5, 2, 10), rng.uniform(1, 4, 10)):
        v = tauberian_forward_oracle(C, mu, [1e6])[0][2]
        assert abs(v / saddle_forward(C, mu) - 1) < 0.02


def test_round_trip_recovers_constant():
    rng = np.random.default_rng(7)
    for C, mu in zip(rng.uniform(0.5, 2, 10), rng.uniform(1, 4, 10)):
        est = oracle_limit(C, mu)
        assert abs(lifshits_constant_legendre(est.value, mu) / C - 1) < 0.05


def test_oracle_is_monotone_and_deterministic():
    a = tauberian_forward_oracle(2.0, 3.0)
    b = tauberian_forward_oracle(2.0, 3.0)
    assert a == b
    assert [r[0] for r in a] == list(DEFAULT_ORACLE_GRID)
    neg = [r[1] for r in a]
    assert neg == sorted(neg)


def test_consistency_report_isotropic():
    rep = consistency_report(ISO)
    assert rep.eta == 4 and rep.mu == 3
    assert rep.a_closed == pytest.approx(15.1869, abs=1e-4)
    assert rep.a_rel_dev < 1e-6
    assert rep.legendre_matches and not rep.paper_matches
    assert rep.verdict == "C_legendre"
    assert rep.oracle_t == 1e6
    d = rep.to_dict()
    assert d["verdict"] == "C_legendre" and set(d) >= {"C_paper", "C_legendre", "a_closed"}
