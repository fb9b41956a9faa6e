"""Finite-difference checks of the transition densities against their
Fokker-Planck equations.

Two evolutions are provided: Crank-Nicolson for the log-price equation

    dP/dt = sigma^2 H K t^(2H-1) (P_xx + P_x)

and a conservative Crank-Nicolson finite-volume scheme for the CEV y
equation dP/dt = (A y P)_yy - ((B y + C) P)_y with outflow at y = 0.
Both start from the closed-form density at t0 > 0 in place of the Dirac
initial condition. Time-dependent coefficients enter each step through
their exact integral over the step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.linalg import solve_banded

from .bs import MarketParams, log_price_law, total_variance
from .cev import (
    CevParams,
    absorption_probability,
    transition_density_y,
)
from .errors import DomainError, InstabilityError
from .process import GfbmParams, k_factor
from .quotes import DensitySlice

__all__ = [
    "Grid1D",
    "evolve_fp_bs",
    "evolve_fp_cev",
    "bs_log_density",
    "l1_error",
    "residual_check",
]


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_x: int
    t0: float
    t1: float
    n_t: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise DomainError("x_min must be below x_max")
        if self.n_x < 16 or self.n_t < 16:
            raise DomainError("n_x and n_t must both be at least 16")
        if not 0.0 < self.t0 < self.t1:
            raise DomainError("need 0 < t0 < t1")

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.n_x * factor, self.t0, self.t1, self.n_t * factor)


def bs_log_density(p: GfbmParams, m: MarketParams, x: np.ndarray, t: float) -> np.ndarray:
    """Closed-form density of x_t = ln S_t - r t, vectorized over ``x``."""
    law = log_price_law(p, m, t)
    x = np.asarray(x, dtype=float)
    return np.exp(-((x - law.mean) ** 2) / (2.0 * law.variance)) / math.sqrt(2.0 * math.pi * law.variance)


def _cn_step(lower, diag, upper, rhs_vec, half):
    # (I - half*L) u_new = (I + half*L) u_old for tridiagonal L with zero Dirichlet ends
    rhs = rhs_vec + half * (diag * rhs_vec)
    rhs[1:] += half * lower[1:] * rhs_vec[:-1]
    rhs[:-1] += half * upper[:-1] * rhs_vec[1:]
    ab = np.zeros((3, rhs_vec.size))
    ab[0, 1:] = -half * upper[:-1]
    ab[1] = 1.0 - half * diag
    ab[2, :-1] = -half * lower[1:]
    return solve_banded((1, 1), ab, rhs)


def evolve_fp_bs(p: GfbmParams, m: MarketParams, g: Grid1D, mass_tol: float = 1e-3) -> DensitySlice:
    """Evolve the log-price density from g.t0 to g.t1 on [x_min, x_max]."""
    x = np.linspace(g.x_min, g.x_max, g.n_x)
    dx = x[1] - x[0]
    u = bs_log_density(p, m, x, g.t0)
    u[0] = u[-1] = 0.0
    mass0 = float(np.trapezoid(u, x))

    # P_xx + P_x, central differences, interior nodes only
    inner = slice(1, -1)
    n_in = g.n_x - 2
    lower = np.full(n_in, 1.0 / dx**2 - 0.5 / dx)
    diag = np.full(n_in, -2.0 / dx**2)
    upper = np.full(n_in, 1.0 / dx**2 + 0.5 / dx)

    times = np.linspace(g.t0, g.t1, g.n_t + 1)
    # integral of sigma^2 H K t^(2H-1) over each step
    tau = 0.5 * m.sigma**2 * k_factor(p) * times ** (2.0 * p.hurst)
    dtau = np.diff(tau)
    v = u[inner].copy()
    for step in dtau:
        v = _cn_step(lower, diag, upper, v, 0.5 * step)
    u[inner] = v
    mass1 = float(np.trapezoid(u, x))
    if not np.all(np.isfinite(u)) or abs(mass1 - mass0) > mass_tol:
        raise InstabilityError(f"mass drifted from {mass0:.6g} to {mass1:.6g}")
    return DensitySlice(x, u, g.t1)


def _bernoulli(z: np.ndarray) -> np.ndarray:
    # z / (e^z - 1), continuous at 0
    out = np.ones_like(z)
    nz = np.abs(z) > 1e-10
    out[nz] = z[nz] / np.expm1(z[nz])
    return out


def _stretched_faces(y_max: float, n: int, stretch: float) -> np.ndarray:
    s = np.linspace(0.0, 1.0, n + 1)
    if stretch == 0.0:
        return y_max * s
    return y_max * np.expm1(stretch * s) / math.expm1(stretch)


def _cev_operator(faces, centers, widths, a_eff, b, c_eff, outflow):
    """Tridiagonal (lower, diag, upper) of dP/dt = -(J_{i+1} - J_i)/h_i.

    Interior fluxes use Scharfetter-Gummel exponential fitting of
    J = v P - D P_y with v = B y + C - A and D = A y.
    """
    n = centers.size
    f = faces[1:-1]
    vel = b * f + c_eff - a_eff
    diff = a_eff * f
    dc = np.diff(centers)
    pe = vel * dc / diff
    # J_j = (D/dc) [Bern(-pe) P_{j-1} - Bern(pe) P_j]
    coef_left = diff / dc * _bernoulli(-pe)
    coef_right = -diff / dc * _bernoulli(pe)

    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    # cell i gains J_i (left face) and loses J_{i+1} (right face)
    diag[:-1] -= coef_left / widths[:-1]
    upper[:-1] -= coef_right / widths[:-1]
    lower[1:] += coef_left / widths[1:]
    diag[1:] += coef_right / widths[1:]
    if outflow:
        # J_0 = (C - A) P_0 < 0 leaves the domain
        diag[0] += (c_eff - a_eff) / widths[0]
    return lower, diag, upper


def evolve_fp_cev(p: GfbmParams, c: CevParams, g: Grid1D, stretch: float = 2.0) -> DensitySlice:
    """Evolve the y density on (0, g.x_max] from g.t0 to g.t1.

    Cells are geometrically refined toward y = 0 (``stretch`` controls the
    ratio). For alpha < 2 probability leaves through y = 0 with flux
    (C - A) P(0); for alpha > 2 the origin is unattainable and the flux
    vanishes. The returned slice has cell-centre values, cell-sum mass and
    ``absorbed`` = total probability absorbed by g.t1.
    """
    if g.x_min != 0.0:
        raise DomainError("the CEV domain must start at y = 0")
    faces = _stretched_faces(g.x_max, g.n_x, stretch)
    centers = 0.5 * (faces[1:] + faces[:-1])
    widths = np.diff(faces)
    y0 = c.y0
    dens = np.vectorize(lambda y: transition_density_y(p, c, y0, y, g.t0))
    u = dens(centers)
    mass0 = float(np.sum(u * widths))
    absorbed0 = absorption_probability(p, c, g.t0)
    outflow = c.alpha < 2.0

    h = p.hurst
    a_coef = c.beta**2 * c.market.sigma**2 * h * k_factor(p)
    b = c.beta * c.market.r
    times = np.linspace(g.t0, g.t1, g.n_t + 1)
    for t_a, t_b in zip(times[:-1], times[1:]):
        dt = t_b - t_a
        # step average of A(t) = a_coef t^(2H-1)
        a_eff = a_coef * (t_b ** (2.0 * h) - t_a ** (2.0 * h)) / (2.0 * h * dt)
        lower, diag, upper = _cev_operator(faces, centers, widths, a_eff, b,
                                           c.drift_ratio * a_eff, outflow)
        u = _cn_step(lower, diag, upper, u, 0.5 * dt)
    mass1 = float(np.sum(u * widths))
    if not np.all(np.isfinite(u)) or mass1 > mass0 * (1.0 + 1e-8) + 1e-12:
        raise InstabilityError(f"mass grew from {mass0:.6g} to {mass1:.6g}")
    return DensitySlice(centers, u, g.t1, mass=mass1, absorbed=absorbed0 + (mass0 - mass1))


def l1_error(slice_: DensitySlice, exact: Callable[[np.ndarray], np.ndarray]) -> float:
    """L1 distance to ``exact`` with cell widths from the slice's abscissae."""
    x = slice_.x
    w = np.gradient(x)
    return float(np.sum(np.abs(slice_.density - exact(x)) * w))


def residual_check(
    density: Callable[[float, float], float],
    p: GfbmParams,
    params,
    points: Iterable[tuple[float, float]],
    h: float = 1e-4,
) -> float:
    """Plug ``density(x, t)`` into its Fokker-Planck equation.

    ``params`` selects the equation: :class:`MarketParams` for the log-price
    equation, :class:`CevParams` for the y equation. Derivatives are central
    differences with steps h*max(|x|, 1) in space and h*t in time. Returns
    max |dP/dt - rhs| over ``points`` divided by max |dP/dt|.
    """
    pts = list(points)
    resid = []
    rates = []
    for x, t in pts:
        if not t > 0.0:
            raise DomainError("residual points need t > 0")
        hx = h * max(abs(x), 1.0)
        ht = h * t
        dp_dt = (density(x, t + ht) - density(x, t - ht)) / (2.0 * ht)
        if isinstance(params, CevParams):
            rhs = _cev_rhs(density, p, params, x, t, hx)
        elif isinstance(params, MarketParams):
            rhs = _bs_rhs(density, p, params, x, t, hx)
        else:
            raise DomainError(f"unsupported parameter type {type(params).__name__}")
        resid.append(abs(dp_dt - rhs))
        rates.append(abs(dp_dt))
    return max(resid) / max(rates)


def _bs_rhs(density, p, m, x, t, hx):
    coef = m.sigma**2 * p.hurst * k_factor(p) * t ** (2.0 * p.hurst - 1.0)
    fm, f0, fp = density(x - hx, t), density(x, t), density(x + hx, t)
    return coef * ((fp - 2.0 * f0 + fm) / hx**2 + (fp - fm) / (2.0 * hx))


def _cev_rhs(density, p, c, y, t, hy):
    h = p.hurst
    a_t = c.beta**2 * c.market.sigma**2 * h * k_factor(p) * t ** (2.0 * h - 1.0)
    b = c.beta * c.market.r
    c_t = c.drift_ratio * a_t

    def diffusion(v):
        return a_t * v * density(v, t)

    def advection(v):
        return (b * v + c_t) * density(v, t)

    d2 = (diffusion(y + hy) - 2.0 * diffusion(y) + diffusion(y - hy)) / hy**2
    d1 = (advection(y + hy) - advection(y - hy)) / (2.0 * hy)
    return d2 - d1
