"""Monte Carlo oracles: exact gfBm paths, exact Black-Scholes terminal draws
and an Euler scheme for the CEV y process with absorption at zero.

Random numbers come from a counter-based generator (Philox) keyed by
``(seed, chunk index)`` where chunks are fixed blocks of ``CHUNK`` paths.
The partition never depends on the number of worker threads, so results
are bit-identical for any degree of parallelism.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lapack

from .bs import MarketParams, total_variance
from .cev import CevParams
from .errors import DomainError, FactorizationError
from .process import GfbmParams, covariance, k_factor

__all__ = [
    "CHUNK",
    "TimeGrid",
    "PathBatch",
    "CevTerminal",
    "McEstimate",
    "covariance_matrix",
    "cholesky_factor",
    "gfbm_paths",
    "bs_terminal",
    "cev_paths_euler",
    "cev_terminal_euler",
    "cev_terminal_prices",
    "mc_price",
]

CHUNK = 8192


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing positive observation times; paths start at 0 at time 0."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise DomainError("time grid must be a nonempty 1-d array")
        if not pts[0] > 0.0:
            raise DomainError(f"first grid point must be positive, got {pts[0]!r}")
        if np.any(np.diff(pts) <= 0.0):
            raise DomainError("time grid must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, t_end: float, n: int) -> "TimeGrid":
        """``n`` equal steps ending at ``t_end``; first point is t_end / n."""
        return cls(t_end * np.arange(1, n + 1) / n)

    def __len__(self) -> int:
        return self.points.size

    @property
    def with_origin(self) -> np.ndarray:
        return np.concatenate([[0.0], self.points])


@dataclass
class PathBatch:
    """``values[i, j]`` is path i at ``grid.points[j]``."""

    grid: TimeGrid
    values: np.ndarray
    seed: int
    absorbed: Optional[np.ndarray] = None
    jitter: float = 0.0

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def absorption_fraction(self) -> float:
        if self.absorbed is None:
            return 0.0
        return float(np.mean(self.absorbed))

    def to_csv(self, path) -> None:
        header = ",".join(repr(float(t)) for t in self.grid.points)
        np.savetxt(path, self.values, delimiter=",", header=header, comments="")


@dataclass
class CevTerminal:
    """Terminal y values of an Euler run and which paths were absorbed."""

    y: np.ndarray
    absorbed: np.ndarray
    seed: int
    n_steps: int

    @property
    def absorption_fraction(self) -> float:
        return float(np.mean(self.absorbed))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int


# -- plumbing ------------------------------------------------------------------

def _n_workers() -> int:
    env = os.environ.get("GFBM_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def _chunks(n_paths: int):
    return [(i, min(CHUNK, n_paths - i * CHUNK)) for i in range(math.ceil(n_paths / CHUNK))]


def _run_chunks(fn, n_paths: int, workers: Optional[int] = None) -> list:
    chunks = _chunks(n_paths)
    workers = workers or _n_workers()
    if workers == 1 or len(chunks) == 1:
        return [fn(c, n) for c, n in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda cn: fn(*cn), chunks))


def _check_paths(n_paths: int, minimum: int = 1) -> None:
    if int(n_paths) != n_paths or n_paths < minimum:
        raise DomainError(f"n_paths must be an integer >= {minimum}, got {n_paths!r}")


# -- gfBm ----------------------------------------------------------------------

def covariance_matrix(p: GfbmParams, grid: TimeGrid) -> np.ndarray:
    t = grid.points
    return np.array([[covariance(p, float(s), float(u)) for u in t] for s in t])


def cholesky_factor(cov: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, retrying once with 1e-12 * max-diagonal jitter.

    Returns ``(L, jitter)``. Raises :class:`FactorizationError` naming the
    first leading minor that is not positive definite.
    """
    try:
        return np.linalg.cholesky(cov), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-12 * float(np.max(np.diag(cov)))
    shifted = cov + jitter * np.eye(cov.shape[0])
    factor, info = lapack.dpotrf(shifted, lower=1, clean=1)
    if info != 0:
        raise FactorizationError(
            f"covariance matrix is not positive definite: leading minor {info} failed",
            minor=int(info),
        )
    return factor, jitter


def gfbm_paths(p: GfbmParams, grid: TimeGrid, n_paths: int, seed: int = 0,
               workers: Optional[int] = None) -> PathBatch:
    """Exact draws of (Z_{t_1}, ..., Z_{t_n}) via the Cholesky factor of their covariance."""
    _check_paths(n_paths)
    factor, jitter = cholesky_factor(covariance_matrix(p, grid))
    n = len(grid)

    def work(chunk, size):
        xi = _chunk_rng(seed, chunk).standard_normal((size, n))
        return xi @ factor.T

    values = np.concatenate(_run_chunks(work, n_paths, workers))
    return PathBatch(grid, values, seed, jitter=jitter)


# -- Black-Scholes ---------------------------------------------------------------

def bs_terminal(p: GfbmParams, m: MarketParams, n_paths: int, seed: int = 0,
                workers: Optional[int] = None) -> np.ndarray:
    """Exact draws of S_T = s0 exp(rT - v/2 + sqrt(v) xi), v = sigma^2 K T^(2H)."""
    _check_paths(n_paths)
    v = total_variance(p, m.sigma, m.t)
    sd = math.sqrt(v)
    drift = m.r * m.t - 0.5 * v

    def work(chunk, size):
        xi = _chunk_rng(seed, chunk).standard_normal(size)
        return m.s0 * np.exp(drift + sd * xi)

    return np.concatenate(_run_chunks(work, n_paths, workers))


# -- CEV Euler ---------------------------------------------------------------------

_NOISES = ("martingale", "gfbm")


def _cev_chunk(p: GfbmParams, c: CevParams, grid: TimeGrid, seed: int, noise: str,
               factor: Optional[np.ndarray], record: bool):
    m = c.market
    beta = c.beta
    k = k_factor(p)
    t = grid.with_origin
    dt = np.diff(t)
    # integrated variance of the driver over each step: K (t_{i+1}^2H - t_i^2H)
    dvar = k * np.diff(t ** (2.0 * p.hurst))
    # the (1-alpha) sigma^2 H K t^(2H-1) dt drift integrated exactly over the step
    ito = beta * (1.0 - c.alpha) * m.sigma**2 * 0.5 * dvar
    n = len(grid)

    def work(chunk, size):
        xi = _chunk_rng(seed, chunk).standard_normal((size, n))
        if noise == "martingale":
            dz = xi * np.sqrt(dvar)
        else:
            z = xi @ factor.T
            dz = np.diff(z, axis=1, prepend=0.0)
        y = np.full(size, c.y0)
        dead = np.zeros(size, dtype=bool)
        out = np.empty((size, n)) if record else None
        for i in range(n):
            root = np.sqrt(np.maximum(y, 0.0))
            y = y + beta * m.r * y * dt[i] + ito[i] + beta * m.sigma * root * dz[:, i]
            dead |= y <= 0.0
            y = np.where(dead, 0.0, y)
            if record:
                out[:, i] = y
        return (out if record else y), dead

    return work


def _cev_setup(p, c, grid, n_paths, noise):
    _check_paths(n_paths)
    if len(grid) < 64:
        raise DomainError(f"Euler grid needs at least 64 steps, got {len(grid)}")
    if noise not in _NOISES:
        raise DomainError(f"noise must be one of {_NOISES}, got {noise!r}")
    if noise == "gfbm":
        return cholesky_factor(covariance_matrix(p, grid))
    return None, 0.0


def cev_paths_euler(p: GfbmParams, c: CevParams, grid: TimeGrid, n_paths: int, seed: int = 0,
                    noise: str = "martingale", workers: Optional[int] = None) -> PathBatch:
    """Euler-Maruyama paths of y = S^(2-alpha), absorbed (frozen at 0) once y <= 0.

    ``noise="martingale"`` drives the scheme with independent Gaussian
    increments of variance K (t_{i+1}^(2H) - t_i^(2H)), the noise whose
    Fokker-Planck equation the closed forms solve. ``noise="gfbm"`` uses
    increments of exact gfBm paths instead; Riemann sums against those
    follow pathwise calculus, so that variant does not reproduce the
    closed-form law when H != 1/2.
    """
    factor, jitter = _cev_setup(p, c, grid, n_paths, noise)
    work = _cev_chunk(p, c, grid, seed, noise, factor, record=True)
    parts = _run_chunks(work, n_paths, workers)
    values = np.concatenate([v for v, _ in parts])
    dead = np.concatenate([d for _, d in parts])
    return PathBatch(grid, values, seed, absorbed=dead, jitter=jitter)


def cev_terminal_euler(p: GfbmParams, c: CevParams, grid: TimeGrid, n_paths: int, seed: int = 0,
                       noise: str = "martingale", workers: Optional[int] = None) -> CevTerminal:
    """Same scheme as :func:`cev_paths_euler`, keeping only terminal values."""
    factor, _ = _cev_setup(p, c, grid, n_paths, noise)
    work = _cev_chunk(p, c, grid, seed, noise, factor, record=False)
    parts = _run_chunks(work, n_paths, workers)
    return CevTerminal(
        y=np.concatenate([v for v, _ in parts]),
        absorbed=np.concatenate([d for _, d in parts]),
        seed=seed,
        n_steps=len(grid),
    )


def cev_terminal_prices(y: np.ndarray, alpha: float) -> np.ndarray:
    """Map terminal y back to S = y^(1/(2-alpha)).

    y = 0 is S = 0 for alpha < 2 and S = +inf for alpha > 2.
    """
    y = np.asarray(y, dtype=float)
    beta = 2.0 - alpha
    with np.errstate(divide="ignore"):
        return np.where(y > 0.0, np.power(np.maximum(y, 0.0), 1.0 / beta),
                        0.0 if beta > 0 else np.inf)


def mc_price(samples: np.ndarray, strike: float, rate: float, maturity: float) -> McEstimate:
    """Discounted mean of (S_T - strike)^+ with its standard error."""
    s = np.asarray(samples, dtype=float)
    if s.size < 2:
        raise DomainError("mc_price needs at least two samples")
    payoff = math.exp(-rate * maturity) * np.maximum(s - strike, 0.0)
    return McEstimate(
        mean=float(payoff.mean()),
        std_error=float(payoff.std(ddof=1) / math.sqrt(s.size)),
        n_paths=int(s.size),
    )
