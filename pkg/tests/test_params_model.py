import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from lifshits.errors import DomainError, ParameterError
from lifshits.numerics.special import gamma as G
from lifshits.params_model import (
    DecayParams,
    default_sigma,
    derive,
    isotropic_bracket,
    isotropic_constant,
    laplace_constant_closed,
    lifshits_constant_legendre,
    lifshits_constant_paper,
    saddle_forward,
    theorem_bracket,
    validate,
)


def P(alpha=4.0, beta=4.0, gamma=4.0, g=1.0, rho=1.0, B=1.0):
    return DecayParams(g, alpha, beta, gamma, rho, B)


def test_derive_examples():
    d = derive(P())
    assert d.eta == 4.0 and d.mu == 3.0 and d.nu == 0.75 and d.sigma == 0.1875
    d = derive(P(6, 1, 3))
    assert d.eta == pytest.approx(4.5, abs=1e-15) and d.mu == pytest.approx(2.0, abs=1e-14)


def test_derive_rejects_nonintegrable():
    with pytest.raises(DomainError):
        derive(P(4, 4, 1.5))
    with pytest.raises(DomainError):
        derive(P(4, 4, 2.0))  # boundary eta = 3 is rejected


@pytest.mark.parametrize("kw", [dict(g=0), dict(alpha=2), dict(beta=-1), dict(gamma=0), dict(rho=-1),
                                dict(B=-1)])
def test_field_invariants(kw):
    with pytest.raises(ParameterError):
        P(**kw)


def test_validate_examples():
    assert validate(P(4, 4, 1.5)).integrable is False
    assert validate(P(4, 4, 4)).theorem_applies is True
    rep = validate(P(6, 4, 9, B=0))
    assert rep.zero_field_ok is False and not rep.theorem_applies
    assert validate(P(6, 4, 2.9, B=0)).theorem_applies
    # boundaries are strict
    assert not validate(P(4, 4, 6.0)).theorem_applies
    assert not validate(P(4, 4, 2.0)).integrable


@settings(max_examples=300, deadline=None)
@given(st.floats(2.05, 12), st.floats(0.2, 30))
def test_eta_above_three_iff_integrable(a, c):
    p = P(a, 1.0, c)
    eta = 3 * a * c / (2 * c + a)
    assert p.eta == pytest.approx(eta, rel=1e-15)
    assume(abs(c - a / (a - 2)) > 1e-9)
    assert (p.eta > 3) == (c > a / (a - 2)) == validate(p).integrable


@settings(max_examples=200, deadline=None)
@given(st.floats(2.05, 12), st.floats(0.2, 30))
def test_nu_mu_relation(a, c):
    assume(c > a / (a - 2) * (1 + 1e-6))
    d = derive(P(a, 1.0, c))
    assert d.nu == pytest.approx(d.mu / (d.mu + 1), rel=1e-13)
    assert 0 < d.nu < 1


def test_laplace_constant_isotropic_value():
    a = laplace_constant_closed(P())
    assert a == pytest.approx(4 * math.pi / 3 * G(0.25), rel=1e-14)
    assert a == pytest.approx(15.186919269936, rel=1e-12)


@pytest.mark.parametrize("alpha", [3.2, 3.5, 4.0, 4.5, 4.9])
def test_isotropic_collapse(alpha):
    p = P(alpha, alpha, alpha, g=1.7, rho=0.3)
    exact = 4 * math.pi * 0.3 / 3 * 1.7 ** (3 / alpha) * G(1 - 3 / alpha)
    assert laplace_constant_closed(p) == pytest.approx(exact, rel=1e-12)
    assert theorem_bracket(p) == pytest.approx(isotropic_bracket(alpha, 0.3), rel=1e-12)


@pytest.mark.parametrize("abc", [(4, 4, 4), (4, 2, 5), (6, 1, 3)])
def test_g_scaling(abc):
    p1 = P(*abc, g=1.0)
    p2 = P(*abc, g=3.7)
    assert laplace_constant_closed(p2) == pytest.approx(3.7 ** (3 / p1.eta) * laplace_constant_closed(p1),
                                                        rel=1e-13)


@pytest.mark.parametrize("ac", [(4, 4), (6, 3), (4, 5)])
def test_beta_limit_branch(ac):
    a, c = ac
    near = laplace_constant_closed(P(a, 1e-2, c))
    lim = laplace_constant_closed(P(a, 0.0, c))
    eta = 3 * a * c / (2 * c + a)
    assert lim == pytest.approx(2 * math.pi * G(1 - 3 / eta), rel=1e-13)
    assert abs(near - lim) / lim < 1e-3
    # continuity across the branch switch
    assert abs(laplace_constant_closed(P(a, 1e-3, c)) - lim) / lim < 1e-3


def test_printed_constant_values():
    c = lifshits_constant_paper(P())
    assert c == pytest.approx((math.pi * G(0.25)) ** 0.25 / 3, rel=1e-13)
    assert c == pytest.approx(0.6124, abs=5e-5)
    assert isotropic_constant(4.0, 1.0, 1.0) == pytest.approx(c, rel=1e-13)
    for alpha in (3.5, 4.5):
        assert isotropic_constant(alpha, 1.3, 0.7) == pytest.approx(
            lifshits_constant_paper(P(alpha, alpha, alpha, g=1.3, rho=0.7)), rel=1e-12)


def test_printed_beta_limit():
    a, c = 4.0, 4.0
    eta = 4.0
    lim = lifshits_constant_paper(P(a, 0.0, c))
    printed = (eta / 3 - 1) * (6 * math.pi * G(1 - 3 / eta) / eta) ** (1 - 3 / eta)
    assert lim == pytest.approx(printed, rel=1e-13)
    assert abs(lifshits_constant_paper(P(a, 1e-2, c)) / lim - 1) < 1e-3


def test_isotropic_constant_domain_and_boundary():
    with pytest.raises(DomainError):
        isotropic_constant(5.0, 1, 1)
    with pytest.raises(DomainError):
        isotropic_constant(3.0, 1, 1)
    assert isotropic_constant(3.0001, 1, 1) < isotropic_constant(3.01, 1, 1) < 0.1


def test_legendre_against_minimisation():
    a = 4 * 3 ** -0.75
    assert lifshits_constant_legendre(a, 3.0) == pytest.approx(1.0, rel=1e-14)
    res = minimize_scalar(lambda E: E + E ** -3, bounds=(0.1, 10), method="bounded",
                          options={"xatol": 1e-12})
    assert res.fun == pytest.approx(a, rel=1e-12)


def test_legendre_isotropic_value_and_round_trip():
    a = laplace_constant_closed(P())
    C = lifshits_constant_legendre(a, 3.0)
    assert C == pytest.approx(5.61e3, rel=1e-3)
    # feed back through the saddle minimum: min_E (t E + C E^-3) / t^{3/4} at t = 1
    res = minimize_scalar(lambda lE: math.exp(lE) + C * math.exp(-3 * lE), bounds=(-5, 10),
                          method="bounded", options={"xatol": 1e-12})
    assert res.fun == pytest.approx(a, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.5, 5))
def test_saddle_round_trip(C, mu):
    assert lifshits_constant_legendre(saddle_forward(C, mu), mu) == pytest.approx(C, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 50), st.floats(0.5, 5), st.floats(0.1, 10))
def test_legendre_homogeneity(a, mu, lam):
    assert lifshits_constant_legendre(lam * a, mu) == pytest.approx(
        lam ** (mu + 1) * lifshits_constant_legendre(a, mu), rel=1e-11)


def test_legendre_domain():
    with pytest.raises(DomainError):
        lifshits_constant_legendre(0.0, 3)
    with pytest.raises(DomainError):
        lifshits_constant_legendre(1.0, -1)


def test_default_sigma_window_midpoint():
    assert default_sigma(4, 4) == 0.1875
