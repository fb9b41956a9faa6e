"""Black-Scholes pricing when the driver is a generalized fractional Bm.

Under dS = r S dt + sigma S dZ the log price x = ln S - r t is Gaussian with
variance sigma^2 K t^(2H), so every quantity below is the classical one with
sigma^2 T replaced by that total variance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .process import GfbmParams, k_factor
from .quotes import PriceQuote
from .specfun import normal_cdf

__all__ = [
    "MarketParams",
    "GaussianLaw",
    "total_variance",
    "log_price_law",
    "price_density",
    "d1_d2",
    "call_price",
    "put_price",
    "ReductionReport",
    "reduction_report",
    "textbook_bs_call",
    "fractional_bs_call",
    "sub_fractional_bs_call",
]


@dataclass(frozen=True)
class MarketParams:
    """Spot ``s0``, strike ``e``, rate ``r``, volatility ``sigma``, maturity ``t``."""

    s0: float
    e: float
    r: float
    sigma: float
    t: float

    def __post_init__(self):
        for name in ("s0", "e", "sigma", "t"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be finite and positive, got {value!r}")
        if not math.isfinite(self.r):
            raise DomainError(f"r must be finite, got {self.r!r}")

    @property
    def discount(self) -> float:
        return math.exp(-self.r * self.t)


@dataclass(frozen=True)
class GaussianLaw:
    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance >= 0.0:
            raise DomainError(f"variance must be >= 0, got {self.variance!r}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x: float) -> float:
        v = self.variance
        return math.exp(-((x - self.mean) ** 2) / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)


def total_variance(p: GfbmParams, sigma: float, t: float) -> float:
    """sigma^2 K t^(2H), the variance of sigma Z_t."""
    return sigma * sigma * k_factor(p) * math.exp(2.0 * p.hurst * math.log(t))


def log_price_law(p: GfbmParams, m: MarketParams, t: float | None = None) -> GaussianLaw:
    """Law of x_t = ln S_t - r t started from x_0 = ln s0."""
    t = m.t if t is None else t
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t!r}")
    v = total_variance(p, m.sigma, t)
    return GaussianLaw(mean=math.log(m.s0) - 0.5 * v, variance=v)


def price_density(p: GfbmParams, m: MarketParams, s_t: float, t: float | None = None) -> float:
    """Risk-neutral density of S_t at ``s_t`` (lognormal, Jacobian 1/s_t)."""
    if not s_t > 0.0:
        raise DomainError(f"price must be positive, got {s_t!r}")
    t = m.t if t is None else t
    law = log_price_law(p, m, t)
    return law.pdf(math.log(s_t) - m.r * t) / s_t


def d1_d2(p: GfbmParams, m: MarketParams) -> tuple[float, float]:
    v = total_variance(p, m.sigma, m.t)
    sd = math.sqrt(v)
    d1 = (math.log(m.s0 / m.e) + m.r * m.t + 0.5 * v) / sd
    return d1, d1 - sd


def call_price(p: GfbmParams, m: MarketParams) -> PriceQuote:
    d1, d2 = d1_d2(p, m)
    price = m.s0 * normal_cdf(d1) - m.e * m.discount * normal_cdf(d2)
    return PriceQuote(max(price, 0.0))


def put_price(p: GfbmParams, m: MarketParams) -> PriceQuote:
    """Put from call by parity C - P = s0 - e e^{-rT}."""
    c = call_price(p, m).price
    return PriceQuote(c - m.s0 + m.e * m.discount)


# -- independent special-case formulas ----------------------------------------
# Written from the published special cases, not from d1_d2, and using the
# stdlib erfc so they share no code with the general formula.

def _phi(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def textbook_bs_call(s0: float, e: float, r: float, sigma: float, t: float) -> float:
    srt = sigma * math.sqrt(t)
    d1 = (math.log(s0 / e) + (r + 0.5 * sigma * sigma) * t) / srt
    d2 = d1 - srt
    return s0 * _phi(d1) - e * math.exp(-r * t) * _phi(d2)


def fractional_bs_call(s0: float, e: float, r: float, sigma: float, t: float, hurst: float) -> float:
    t2h = t ** (2.0 * hurst)
    d1 = (math.log(s0 / e) + r * t + 0.5 * sigma**2 * t2h) / (sigma * t**hurst)
    d2 = (math.log(s0 / e) + r * t - 0.5 * sigma**2 * t2h) / (sigma * t**hurst)
    return s0 * _phi(d1) - e * math.exp(-r * t) * _phi(d2)


def sub_fractional_bs_call(s0: float, e: float, r: float, sigma: float, t: float, hurst: float) -> float:
    t2h = t ** (2.0 * hurst)
    half_var = (1.0 - 2.0 ** (2.0 * hurst - 2.0)) * sigma**2 * t2h
    sd = sigma * math.sqrt((2.0 - 2.0 ** (2.0 * hurst - 1.0)) * t2h)
    d1 = (math.log(s0 / e) + r * t + half_var) / sd
    d2 = (math.log(s0 / e) + r * t - half_var) / sd
    return s0 * _phi(d1) - e * math.exp(-r * t) * _phi(d2)


@dataclass(frozen=True)
class ReductionReport:
    case: str
    general: float
    special: float

    @property
    def gap(self) -> float:
        return abs(self.general - self.special)


def reduction_report(p: GfbmParams, m: MarketParams) -> list[ReductionReport]:
    """Compare the general call against every special case ``p`` falls into.

    Returns one record per applicable reduction (fractional for b = 0,
    sub-fractional for a = b = 1/sqrt(2), textbook for (1, 0, 1/2)); an
    empty list when ``p`` is none of them.
    """
    general = call_price(p, m).price
    out = []
    if p.a == 1.0 and p.b == 0.0:
        out.append(ReductionReport(
            "fractional", general,
            fractional_bs_call(m.s0, m.e, m.r, m.sigma, m.t, p.hurst),
        ))
        if p.hurst == 0.5:
            out.append(ReductionReport(
                "standard", general, textbook_bs_call(m.s0, m.e, m.r, m.sigma, m.t),
            ))
    if p.b != 0.0 and p.a == p.b and abs(p.a - 1.0 / math.sqrt(2.0)) < 1e-15:
        out.append(ReductionReport(
            "sub-fractional", general,
            sub_fractional_bs_call(m.s0, m.e, m.r, m.sigma, m.t, p.hurst),
        ))
    return out
