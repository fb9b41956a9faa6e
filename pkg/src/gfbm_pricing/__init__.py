"""European call pricing under generalized fractional Brownian motion.

Closed forms for the Black-Scholes and CEV models driven by
Z = a B^H_t + b B^H_{-t}, with Monte Carlo and Fokker-Planck oracles.
"""
from .bs import MarketParams, call_price, put_price
from .cev import CevParams, call_price_cev
from .errors import (
    ConvergenceError,
    DomainError,
    FactorizationError,
    GfbmError,
    InstabilityError,
)
from .process import GfbmParams, ProcessKind, classify
from .quotes import DensitySlice, PriceQuote

__version__ = "0.1.0"

__all__ = [
    "GfbmParams",
    "ProcessKind",
    "classify",
    "MarketParams",
    "CevParams",
    "call_price",
    "put_price",
    "call_price_cev",
    "PriceQuote",
    "DensitySlice",
    "GfbmError",
    "DomainError",
    "ConvergenceError",
    "FactorizationError",
    "InstabilityError",
]
