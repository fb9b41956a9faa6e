import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfbm_pricing.errors import DomainError
from gfbm_pricing.process import (
    GfbmParams,
    ProcessKind,
    classify,
    covariance,
    ito_drift_coeff,
    k_factor,
    variance,
)

W = 1.0 / math.sqrt(2.0)

weights = st.one_of(st.just(0.0), st.floats(0.05, 5), st.floats(-5, -0.05))
hursts = st.floats(0.01, 0.99)
times = st.floats(0.0, 50.0)


def valid_params(a, b, h):
    if a == 0.0 and b == 0.0:
        a = 1.0
    return GfbmParams(a, b, h)


@pytest.mark.parametrize("a, b, h, expected", [
    (1.0, 0.0, 0.7, 1.0),
    (W, W, 0.6, 2.0 - 2.0**0.2),
    (1.0, 1.0, 0.5, 2.0),
])
def test_k_factor_examples(a, b, h, expected):
    assert k_factor(GfbmParams(a, b, h)) == pytest.approx(expected, rel=1e-14)


def test_k_factor_positive_randomized():
    rng = np.random.default_rng(11)
    n = 1_000_000
    a = rng.uniform(-10, 10, n)
    b = rng.uniform(-10, 10, n)
    h = rng.uniform(1e-6, 1 - 1e-6, n)
    k = (a + b) ** 2 - 2.0 ** (2 * h) * a * b
    assert np.all(k > 0)


def test_invalid_params():
    with pytest.raises(DomainError):
        GfbmParams(0.0, 0.0, 0.5)
    for h in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DomainError):
            GfbmParams(1.0, 0.0, h)


def test_covariance_examples():
    assert covariance(GfbmParams(1, 0, 0.5), 1.0, 2.0) == pytest.approx(1.0, rel=1e-15)
    p = GfbmParams(1, 0, 0.37)
    assert covariance(p, 1.7, 1.7) == pytest.approx(1.7 ** 0.74, rel=1e-15)
    assert covariance(GfbmParams(1, 0.5, 0.7), 1.0, 1.0) == pytest.approx(0.9304920892271058, rel=1e-14)


def test_negative_time_rejected():
    p = GfbmParams.standard()
    with pytest.raises(DomainError):
        covariance(p, -1.0, 1.0)
    with pytest.raises(DomainError):
        variance(p, -0.1)
    with pytest.raises(DomainError):
        ito_drift_coeff(p, 0.0)


def test_variance_examples():
    assert variance(GfbmParams(W, W, 0.5), 1.0) == pytest.approx(1.0, rel=1e-15)
    assert variance(GfbmParams(1, 0.5, 0.7), 0.0) == 0.0
    assert variance(GfbmParams(1, 0.5, 0.7), 2.0) == pytest.approx(0.9304920892271058 * 2**1.4, rel=1e-14)


@given(weights, weights, hursts, times, times)
def test_covariance_symmetric(a, b, h, s, t):
    p = valid_params(a, b, h)
    assert covariance(p, s, t) == covariance(p, t, s)


@given(weights, weights, hursts, times)
def test_covariance_diagonal_is_variance(a, b, h, t):
    p = valid_params(a, b, h)
    assert covariance(p, t, t) == variance(p, t)


@given(hursts, st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.1, 3))
def test_covariance_reductions(h, s, t, a):
    fbm = GfbmParams(a, 0.0, h)
    expected = 0.5 * a * a * (s ** (2 * h) + t ** (2 * h) - abs(t - s) ** (2 * h))
    assert covariance(fbm, s, t) == pytest.approx(expected, rel=1e-10, abs=1e-12)
    sub = GfbmParams(a, a, h)
    expected = 2 * a * a * (s ** (2 * h) + t ** (2 * h) - 0.5 * ((s + t) ** (2 * h) + abs(t - s) ** (2 * h)))
    assert covariance(sub, s, t) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_ito_coefficient_examples():
    assert ito_drift_coeff(GfbmParams(1, 0, 0.5), 3.0) == pytest.approx(0.5, rel=1e-15)
    assert ito_drift_coeff(GfbmParams(1, 0, 0.7), 1.0) == pytest.approx(0.7, rel=1e-15)
    p = GfbmParams(W, W, 0.6)
    expected = 0.6 * (2 - 2**0.2) * 2**0.2
    assert ito_drift_coeff(p, 2.0) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=200)
@given(weights, weights, hursts, st.floats(0.05, 20))
def test_ito_coefficient_is_half_variance_derivative(a, b, h, t):
    p = valid_params(a, b, h)
    step = 1e-4 * t
    fd = (variance(p, t + step) - variance(p, t - step)) / (2 * step)
    assert ito_drift_coeff(p, t) == pytest.approx(0.5 * fd, rel=1e-6)


def test_huge_time_does_not_overflow():
    assert math.isfinite(variance(GfbmParams(1, 0.5, 0.9), 1e150))


@pytest.mark.parametrize("params, kind", [
    ((1, 0, 0.5), ProcessKind.STANDARD_BM),
    ((2.0, 0, 0.5), ProcessKind.STANDARD_BM),
    ((1, 0, 0.3), ProcessKind.FRACTIONAL_BM),
    ((W, W, 0.3), ProcessKind.SUB_FRACTIONAL_BM),
    ((1, 0.5, 0.7), ProcessKind.GENERAL),
])
def test_classify(params, kind):
    assert classify(GfbmParams(*params)) is kind
