"""Result records returned by the pricers, samplers and PDE solvers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class PriceQuote:
    """A price together with how it was obtained.

    ``provenance`` is one of ``"closed-form"``, ``"monte-carlo"`` or ``"pde"``;
    ``std_error`` is set only for Monte Carlo quotes.
    """

    price: float
    provenance: str = "closed-form"
    std_error: Optional[float] = None
    n_paths: Optional[int] = None

    def __float__(self) -> float:
        return float(self.price)

    def as_dict(self) -> dict:
        out = {"price": self.price, "provenance": self.provenance}
        if self.std_error is not None:
            out["std_error"] = self.std_error
        if self.n_paths is not None:
            out["n_paths"] = self.n_paths
        return out


@dataclass
class DensitySlice:
    """Density tabulated on ``x`` at time ``t``.

    ``mass`` defaults to the trapezoid integral of ``density``; ``absorbed``
    is the mass known to have left through an absorbing boundary.
    """

    x: np.ndarray
    density: np.ndarray
    t: float
    mass: Optional[float] = None
    absorbed: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if self.mass is None:
            self.mass = float(np.trapezoid(self.density, self.x))

    def to_csv(self, path) -> None:
        np.savetxt(
            path,
            np.column_stack([self.x, self.density]),
            delimiter=",",
            header="x,density",
            comments="",
        )
