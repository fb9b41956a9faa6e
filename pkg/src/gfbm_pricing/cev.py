"""Constant elasticity of variance pricing under a generalized fractional Bm.

The price follows dS = r S dt + sigma S^(alpha/2) dZ. With y = S^(2-alpha)
the dynamics become a time-inhomogeneous Feller diffusion

    dy = (B y + C(t)) dt + sqrt(2 A(t) y) dW,
    A(t) = (2-alpha)^2 sigma^2 H K t^(2H-1),  B = (2-alpha) r,
    C(t) = (1-alpha)/(2-alpha) A(t),

whose transition law is a scaled noncentral chi-squared with scale

    phi(t) = int_0^t A(s) e^{B (t-s)} ds = C0 t^(2H) M(1, 2H+1, B t),
    C0 = (2-alpha)^2 sigma^2 K / 2.

For alpha < 2 the origin is absorbing and the y density is sub-stochastic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from scipy import integrate

from .bs import MarketParams, call_price
from .errors import DomainError
from .process import GfbmParams, k_factor
from .quotes import PriceQuote
from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    kummer_m,
    log_bessel_i,
    noncentral_chi2_sf,
    reg_upper_gamma,
    whittaker_m,
)

__all__ = [
    "CevParams",
    "CevTransform",
    "drift_diffusion_coefficients",
    "phi",
    "phi_whittaker",
    "phi_quadrature",
    "transform",
    "transition_density_y",
    "transition_density_s",
    "absorption_probability",
    "call_price_cev",
    "LimitGap",
    "bs_limit_gap",
]


@dataclass(frozen=True)
class CevParams:
    """Market data plus elasticity ``alpha`` (any real except 2).

    ``market.sigma`` is the CEV diffusion scale, so local volatility at the
    spot is ``sigma * s0**(alpha/2 - 1)``.
    """

    market: MarketParams
    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise DomainError(f"alpha must be finite, got {self.alpha!r}")
        if self.alpha == 2.0:
            raise DomainError("alpha = 2 is the Black-Scholes model; use bs.call_price")

    @property
    def beta(self) -> float:
        """2 - alpha, the exponent of the y = S^(2-alpha) transform."""
        return 2.0 - self.alpha

    @property
    def theta(self) -> float:
        """Bessel order 1/|2 - alpha|."""
        return 1.0 / abs(2.0 - self.alpha)

    @property
    def drift_ratio(self) -> float:
        """D = C(t)/A(t) = (1 - alpha)/(2 - alpha), constant in time."""
        return (1.0 - self.alpha) / (2.0 - self.alpha)

    @property
    def y0(self) -> float:
        return self.market.s0 ** self.beta

    @classmethod
    def from_local_vol(cls, market: MarketParams, alpha: float) -> "CevParams":
        """Rescale ``market.sigma`` so local volatility at s0 equals it."""
        sigma = market.sigma * market.s0 ** (1.0 - 0.5 * alpha)
        m = MarketParams(market.s0, market.e, market.r, sigma, market.t)
        return cls(m, alpha)


@dataclass(frozen=True)
class CevTransform:
    phi: float
    k: float
    l: float
    f: float
    theta: float


def drift_diffusion_coefficients(p: GfbmParams, c: CevParams, t: float) -> tuple[float, float, float]:
    """Feller coefficients (A(t), B, C(t)) of the y process."""
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t!r}")
    h = p.hurst
    sig = c.market.sigma
    a_t = c.beta**2 * sig * sig * h * k_factor(p) * math.exp((2.0 * h - 1.0) * math.log(t))
    return a_t, c.beta * c.market.r, c.drift_ratio * a_t


def _phi_scale(p: GfbmParams, c: CevParams) -> float:
    return 0.5 * c.beta**2 * c.market.sigma**2 * k_factor(p)


def phi(p: GfbmParams, c: CevParams, t: float | None = None,
        ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Accumulated diffusion scale int_0^t A(s) e^{B (t-s)} ds, closed form."""
    t = c.market.t if t is None else t
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t!r}")
    h = p.hurst
    bt = c.beta * c.market.r * t
    return _phi_scale(p, c) * math.exp(2.0 * h * math.log(t)) * kummer_m(1.0, 2.0 * h + 1.0, bt, ctl)


def phi_whittaker(p: GfbmParams, c: CevParams, t: float | None = None) -> float:
    """phi through the Whittaker form

        C0 t^(2H) / (2H+1) [2H + 1 + e^{z/2} z^{-H} M_{H, H+1/2}(z)],  z = B t,

    which needs z > 0 (z = 0 collapses to C0 t^(2H)).
    """
    t = c.market.t if t is None else t
    h = p.hurst
    z = c.beta * c.market.r * t
    base = _phi_scale(p, c) * t ** (2.0 * h)
    if z == 0.0:
        return base
    if z < 0.0:
        raise DomainError("the Whittaker form of phi needs (2 - alpha) r t > 0")
    bracket = 2.0 * h + 1.0 + math.exp(0.5 * z - h * math.log(z)) * whittaker_m(h, h + 0.5, z)
    return base * bracket / (2.0 * h + 1.0)


def phi_quadrature(p: GfbmParams, c: CevParams, t: float | None = None) -> float:
    """phi by adaptive Gauss-Kronrod quadrature of its defining integral.

    Substituting u = s^(2H) removes the s^(2H-1) endpoint singularity.
    """
    t = c.market.t if t is None else t
    h = p.hurst
    b = c.beta * c.market.r
    scale = _phi_scale(p, c)
    upper = t ** (2.0 * h)
    value, _ = integrate.quad(
        lambda u: math.exp(b * (t - u ** (1.0 / (2.0 * h)))),
        0.0, upper, epsabs=0.0, epsrel=1e-13, limit=200,
    )
    return scale * value


def transform(p: GfbmParams, c: CevParams, t: float | None = None) -> CevTransform:
    """Constants (phi, k, l, F, theta) of the closed-form price at maturity."""
    m = c.market
    t = m.t if t is None else t
    ph = phi(p, c, t)
    k = 1.0 / ph
    l_ = k * m.s0 ** c.beta * math.exp(m.r * c.beta * t)
    f = k * m.e ** c.beta
    return CevTransform(phi=ph, k=k, l=l_, f=f, theta=c.theta)


def _log_density_y(ph: float, x0: float, y: float, drift_ratio: float, order: float) -> float:
    # x0 = y0 e^{Bt}; the exponential factor of the Bessel function is folded
    # into -(sqrt(y) - sqrt(x0))^2 / phi to keep everything in range
    z = 2.0 * math.sqrt(x0 * y) / ph
    return (
        -math.log(ph)
        + 0.5 * (drift_ratio - 1.0) * (math.log(y) - math.log(x0))
        - (math.sqrt(y) - math.sqrt(x0)) ** 2 / ph
        + log_bessel_i(order, z)
        - z
    )


def transition_density_y(p: GfbmParams, c: CevParams, y0: float, y: float, t: float) -> float:
    """Density of y_t at ``y`` given y_0 = ``y0``.

        (1/phi) (y / (y0 e^{Bt}))^((D-1)/2) exp(-(y + y0 e^{Bt}) / phi)
            I_theta(2 sqrt(y0 e^{Bt} y) / phi)

    with phi = phi(t), D = (1-alpha)/(2-alpha) and theta = |1 - D|.
    """
    if not (y0 > 0.0 and y > 0.0 and t > 0.0):
        raise DomainError(f"need y0, y, t > 0, got {y0!r}, {y!r}, {t!r}")
    ph = phi(p, c, t)
    x0 = y0 * math.exp(c.beta * c.market.r * t)
    return math.exp(_log_density_y(ph, x0, y, c.drift_ratio, c.theta))


def transition_density_s(p: GfbmParams, c: CevParams, s_t: float, t: float | None = None) -> float:
    """Density of S_t at ``s_t`` (Jacobian |2-alpha| s^(1-alpha))."""
    if not s_t > 0.0:
        raise DomainError(f"price must be positive, got {s_t!r}")
    t = c.market.t if t is None else t
    beta = c.beta
    y = s_t**beta
    ph = phi(p, c, t)
    x0 = c.y0 * math.exp(beta * c.market.r * t)
    log_p = _log_density_y(ph, x0, y, c.drift_ratio, c.theta)
    return math.exp(log_p + math.log(abs(beta)) + (1.0 - c.alpha) * math.log(s_t))


def absorption_probability(p: GfbmParams, c: CevParams, t: float | None = None) -> float:
    """Probability that S has been absorbed at 0 by time t.

    Equals Q(theta, l_t) (regularized upper gamma) for alpha < 2 and 0 for
    alpha > 2, where 0 is unattainable.
    """
    if c.alpha > 2.0:
        return 0.0
    tr = transform(p, c, t)
    return reg_upper_gamma(tr.theta, tr.l)


def call_price_cev(p: GfbmParams, c: CevParams, ctl: SeriesControl = DEFAULT_CONTROL) -> PriceQuote:
    """European call from the noncentral chi-squared representation."""
    m = c.market
    tr = transform(p, c)
    two_f, two_l = 2.0 * tr.f, 2.0 * tr.l
    disc = m.e * m.discount
    if c.alpha < 2.0:
        nu = 2.0 / (2.0 - c.alpha)
        price = (
            m.s0 * noncentral_chi2_sf(two_f, 2.0 + nu, two_l, ctl)
            - disc * (1.0 - noncentral_chi2_sf(two_l, nu, two_f, ctl))
        )
    else:
        nu = 2.0 / (c.alpha - 2.0)
        price = (
            m.s0 * noncentral_chi2_sf(two_l, nu, two_f, ctl)
            - disc * (1.0 - noncentral_chi2_sf(two_f, 2.0 + nu, two_l, ctl))
        )
    return PriceQuote(max(price, 0.0))


@dataclass(frozen=True)
class LimitGap:
    alpha: float
    cev: float
    bs: float

    @property
    def gap(self) -> float:
        return abs(self.cev - self.bs)


def bs_limit_gap(p: GfbmParams, m: MarketParams, alphas: Iterable[float]) -> list[LimitGap]:
    """|C_cev(alpha) - C_bs| along ``alphas``.

    ``m.sigma`` is the Black-Scholes volatility; each CEV run uses
    sigma s0^(1 - alpha/2) so both models share the local volatility at s0.
    """
    bs = call_price(p, m).price
    rows = []
    for alpha in alphas:
        c = CevParams.from_local_vol(m, alpha)
        rows.append(LimitGap(alpha, call_price_cev(p, c).price, bs))
    return rows
