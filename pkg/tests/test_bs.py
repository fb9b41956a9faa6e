import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from gfbm_pricing.bs import (
    MarketParams,
    call_price,
    d1_d2,
    fractional_bs_call,
    log_price_law,
    price_density,
    put_price,
    reduction_report,
    sub_fractional_bs_call,
    textbook_bs_call,
    total_variance,
)
from gfbm_pricing.errors import DomainError
from gfbm_pricing.process import GfbmParams

W = 1.0 / math.sqrt(2.0)
BM = GfbmParams.standard()
BASE = MarketParams(100.0, 100.0, 0.05, 0.2, 1.0)

markets = st.builds(
    MarketParams,
    s0=st.floats(20, 200),
    e=st.floats(20, 200),
    r=st.floats(-0.02, 0.1),
    sigma=st.floats(0.05, 0.8),
    t=st.floats(0.05, 5),
)
processes = st.builds(
    GfbmParams,
    a=st.floats(0.2, 2),
    b=st.floats(-0.5, 1.5),
    hurst=st.floats(0.1, 0.9),
)


def log_quad(p, m, g, lo=-math.inf):
    """int g(s) P_S(s) ds, computed in x = ln s so the lognormal is well scaled."""
    law = log_price_law(p, m)
    # the law is of ln S - r t; shift to ln S
    mu = law.mean + m.r * m.t
    lo = max(lo, mu - 14 * law.std)
    hi = mu + 14 * law.std
    if lo >= hi:
        return 0.0
    f = lambda x: g(math.exp(x)) * price_density(p, m, math.exp(x)) * math.exp(x)
    pts = [v for v in (mu - law.std, mu, mu + law.std) if lo < v < hi]
    val, _ = integrate.quad(f, lo, hi, points=pts or None, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


def quad_call(p, m):
    """Discounted payoff integrated against the price density."""
    return m.discount * log_quad(p, m, lambda s: s - m.e, lo=math.log(m.e))


def test_textbook_value():
    # quadrature of the lognormal density gives 10.45058357218557
    assert call_price(BM, BASE).price == pytest.approx(10.45058357218557, abs=1e-10)
    assert round(call_price(BM, BASE).price, 4) == 10.4506
    assert put_price(BM, BASE).price == pytest.approx(5.573526022256971, abs=1e-10)


def test_quote_fields():
    q = call_price(BM, BASE)
    assert q.provenance == "closed-form"
    assert q.std_error is None
    assert float(q) == q.price


def test_deep_itm_limit():
    m = MarketParams(100.0, 1e-8, 0.05, 0.2, 1.0)
    assert call_price(BM, m).price == pytest.approx(100.0, abs=1e-6)


def test_deep_otm_is_zero():
    m = MarketParams(100.0, 1e6, 0.0, 0.1, 0.5)
    assert call_price(BM, m).price == 0.0


def test_total_variance():
    assert total_variance(GfbmParams(1, 0, 0.7), 0.3, 2.0) == pytest.approx(0.09 * 2**1.4, rel=1e-14)
    p = GfbmParams(W, W, 0.6)
    assert total_variance(p, 1.0, 1.0) == pytest.approx(2 - 2**0.2, rel=1e-14)


def test_d1_d2_gap():
    p = GfbmParams(1, 0.5, 0.7)
    d1, d2 = d1_d2(p, BASE)
    assert d1 - d2 == pytest.approx(math.sqrt(total_variance(p, BASE.sigma, BASE.t)), rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(processes, markets)
def test_price_matches_density_quadrature(p, m):
    assert call_price(p, m).price == pytest.approx(quad_call(p, m), abs=1e-8 * m.s0)


@settings(max_examples=40, deadline=None)
@given(processes, markets)
def test_density_integrates_to_one_with_forward_mean(p, m):
    mass = log_quad(p, m, lambda s: 1.0)
    mean = log_quad(p, m, lambda s: s)
    assert mass == pytest.approx(1.0, abs=1e-9)
    assert mean == pytest.approx(m.s0 * math.exp(m.r * m.t), rel=1e-9)


@given(processes, markets)
def test_put_call_parity(p, m):
    c = call_price(p, m).price
    q = put_price(p, m).price
    assert c - q == pytest.approx(m.s0 - m.e * m.discount, abs=1e-9 * m.s0)


@given(processes, markets)
def test_bounds(p, m):
    c = call_price(p, m).price
    assert max(m.s0 - m.e * m.discount, 0.0) - 1e-9 * m.s0 <= c <= m.s0 + 1e-12


@given(processes, markets, st.floats(0.05, 0.5))
def test_monotone_in_spot_and_strike(p, m, bump):
    c = call_price(p, m).price
    up_spot = MarketParams(m.s0 * (1 + bump), m.e, m.r, m.sigma, m.t)
    up_strike = MarketParams(m.s0, m.e * (1 + bump), m.r, m.sigma, m.t)
    assert call_price(p, up_spot).price >= c - 1e-12
    assert call_price(p, up_strike).price <= c + 1e-12


@given(processes, markets, st.floats(0.05, 0.5))
def test_monotone_in_sigma(p, m, bump):
    c = call_price(p, m).price
    m2 = MarketParams(m.s0, m.e, m.r, m.sigma * (1 + bump), m.t)
    assert call_price(p, m2).price >= c - 1e-12


@given(processes, st.floats(0.05, 0.8), st.floats(0.1, 5), st.floats(0.2, 5))
def test_time_scaling(p, sigma, t, lam):
    # with r = 0 the price depends on (sigma, T) only through sigma^2 T^(2H)
    m1 = MarketParams(100.0, 95.0, 0.0, sigma, lam * t)
    m2 = MarketParams(100.0, 95.0, 0.0, sigma * lam**p.hurst, t)
    assert call_price(p, m1).price == pytest.approx(call_price(p, m2).price, abs=1e-10)


def test_independent_formulas_agree():
    m = BASE
    assert textbook_bs_call(100, 100, 0.05, 0.2, 1.0) == pytest.approx(10.45058357218557, abs=1e-10)
    assert fractional_bs_call(100, 100, 0.05, 0.2, 1.0, 0.5) == pytest.approx(10.45058357218557, abs=1e-10)
    # sfBm at H = 1/2 is standard Bm
    assert sub_fractional_bs_call(100, 100, 0.05, 0.2, 1.0, 0.5) == pytest.approx(10.45058357218557, abs=1e-10)
    for row in reduction_report(GfbmParams(1, 0, 0.3), m):
        assert row.gap <= 1e-10


def test_domain_errors():
    with pytest.raises(DomainError):
        MarketParams(0.0, 100, 0.05, 0.2, 1)
    with pytest.raises(DomainError):
        MarketParams(100, 100, 0.05, 0.0, 1)
    with pytest.raises(DomainError):
        MarketParams(100, 100, math.nan, 0.2, 1)
    with pytest.raises(DomainError):
        price_density(BM, BASE, -1.0)
    with pytest.raises(DomainError):
        log_price_law(BM, BASE, 0.0)
