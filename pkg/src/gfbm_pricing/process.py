"""Generalized fractional Brownian motion Z = a B^H_t + b B^H_{-t}.

The three analytic primitives (covariance, variance, Ito drift coefficient)
consumed by the pricers, samplers and PDE checks live here.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "GfbmParams",
    "ProcessKind",
    "k_factor",
    "covariance",
    "variance",
    "ito_drift_coeff",
    "classify",
]


class ProcessKind(enum.Enum):
    STANDARD_BM = "StandardBm"
    FRACTIONAL_BM = "FractionalBm"
    SUB_FRACTIONAL_BM = "SubFractionalBm"
    GENERAL = "General"


@dataclass(frozen=True)
class GfbmParams:
    """Weights ``(a, b)`` and Hurst exponent ``hurst`` of a gfBm.

    Construction validates ``(a, b) != (0, 0)`` and ``0 < hurst < 1``.
    """

    a: float
    b: float
    hurst: float

    def __post_init__(self):
        for name in ("a", "b", "hurst"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.a == 0.0 and self.b == 0.0:
            raise DomainError("(a, b) must not both be zero")
        if not 0.0 < self.hurst < 1.0:
            raise DomainError(f"hurst must lie in (0, 1), got {self.hurst!r}")

    @property
    def k(self) -> float:
        return k_factor(self)

    @classmethod
    def standard(cls) -> "GfbmParams":
        return cls(1.0, 0.0, 0.5)

    @classmethod
    def fractional(cls, hurst: float) -> "GfbmParams":
        return cls(1.0, 0.0, hurst)

    @classmethod
    def sub_fractional(cls, hurst: float) -> "GfbmParams":
        w = 1.0 / math.sqrt(2.0)
        return cls(w, w, hurst)


def _pow2h(t: float, hurst: float) -> float:
    # t**(2H) through exp/log so huge t cannot overflow an intermediate
    if t == 0.0:
        return 0.0
    return math.exp(2.0 * hurst * math.log(t))


def _check_time(t: float, name: str = "t") -> None:
    if not t >= 0.0 or not math.isfinite(t):
        raise DomainError(f"{name} must be a finite nonnegative time, got {t!r}")


def k_factor(p: GfbmParams) -> float:
    """Unit-time variance ``(a+b)^2 - 2^(2H) a b`` of the process."""
    a, b, h = p.a, p.b, p.hurst
    k = (a + b) ** 2 - math.exp(2.0 * h * math.log(2.0)) * a * b
    if not k > 0.0:
        raise DomainError(f"nonpositive variance factor {k!r} for {p}")
    return k


def covariance(p: GfbmParams, s: float, t: float) -> float:
    """E[Z_s Z_t]."""
    _check_time(s, "s")
    _check_time(t, "t")
    if s == t:
        return variance(p, t)
    a, b, h = p.a, p.b, p.hurst
    return (
        0.5 * (a + b) ** 2 * (_pow2h(s, h) + _pow2h(t, h))
        - a * b * _pow2h(s + t, h)
        - 0.5 * (a * a + b * b) * _pow2h(abs(t - s), h)
    )


def variance(p: GfbmParams, t: float) -> float:
    """E[Z_t^2] = K t^(2H)."""
    _check_time(t)
    return k_factor(p) * _pow2h(t, p.hurst)


def ito_drift_coeff(p: GfbmParams, t: float) -> float:
    """Coefficient H K t^(2H-1) multiplying f'' dt in the Ito formula.

    Equals half the time derivative of :func:`variance`. Undefined at
    ``t = 0`` when ``H < 1/2``, so ``t`` must be strictly positive.
    """
    if not t > 0.0 or not math.isfinite(t):
        raise DomainError(f"t must be a finite positive time, got {t!r}")
    h = p.hurst
    return h * k_factor(p) * math.exp((2.0 * h - 1.0) * math.log(t))


def classify(p: GfbmParams) -> ProcessKind:
    """Name the classical process ``p`` reduces to (exact comparisons)."""
    if p.b == 0.0:
        if p.hurst == 0.5:
            return ProcessKind.STANDARD_BM
        return ProcessKind.FRACTIONAL_BM
    if p.a == p.b:
        return ProcessKind.SUB_FRACTIONAL_BM
    return ProcessKind.GENERAL
