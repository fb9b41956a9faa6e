"""Special functions needed by the closed-form pricers.

Everything here is built from elementary functions only (``exp``, ``log``,
``sqrt``, ``log1p``); no erf, gamma or Bessel routine from a platform
library is used. Series carry an explicit :class:`SeriesControl` so callers
can trade accuracy for speed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "normal_cdf",
    "normal_sf",
    "ln_gamma",
    "reg_lower_gamma",
    "reg_upper_gamma",
    "bessel_i",
    "bessel_i_scaled",
    "log_bessel_i",
    "kummer_m",
    "whittaker_m",
    "noncentral_chi2_sf",
    "q_normal_limit",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SeriesControl:
    abs_tol: float = 1e-14
    max_terms: int = 100_000

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms!r}")


DEFAULT_CONTROL = SeriesControl()


# -- gamma family -----------------------------------------------------------

# Bernoulli-number coefficients of the Stirling series for ln Gamma
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)


def _stirling_correction(x: float) -> float:
    """ln Gamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)] for x >= 10."""
    inv = 1.0 / x
    inv2 = inv * inv
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc * inv


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"ln_gamma needs a finite positive argument, got {x!r}")
    if x >= 10.0:
        return (x - 0.5) * math.log(x) - x + _LOG_SQRT_2PI + _stirling_correction(x)
    # shift up to x >= 10 so only the Stirling branch is ever used
    shift = 0.0
    while x < 10.0:
        shift += math.log(x)
        x += 1.0
    return ln_gamma(x) - shift


def _log_gamma_kernel(s: float, x: float) -> float:
    """log of x^s e^{-x} / Gamma(s), accurate when s and x are both large.

    The direct form cancels two numbers of size ~s ln s; for s >= 10 the
    Stirling expansion lets the leading terms collapse into a log1p.
    """
    if x == 0.0:
        return -math.inf
    if s < 10.0:
        return s * math.log(x) - x - ln_gamma(s)
    u = (x - s) / s
    # u - log1p(u) loses x entirely when x << s; use logs directly there
    core = u - math.log1p(u) if u > -0.5 else u - (math.log(x) - math.log(s))
    return (
        -s * core
        + 0.5 * math.log(s)
        - _LOG_SQRT_2PI
        - _stirling_correction(s)
    )


def _gamma_series(s: float, x: float, ctl: SeriesControl) -> float:
    # sum_{n>=0} x^n / (s+1)...(s+n); lower P = kernel * sum / s
    term = 1.0 / s
    total = term
    for n in range(1, ctl.max_terms + 1):
        term *= x / (s + n)
        total += term
        if term < total * ctl.abs_tol * 1e-2:
            return total
    raise ConvergenceError(f"incomplete gamma series for s={s}, x={x} did not converge")


def _gamma_contfrac(s: float, x: float, ctl: SeriesControl) -> float:
    # modified Lentz evaluation of the continued fraction for Gamma(s, x) e^x x^-s
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, ctl.max_terms + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < ctl.abs_tol * 1e-2:
            return h
    raise ConvergenceError(f"incomplete gamma fraction for s={s}, x={x} did not converge")


def _check_gamma_args(s: float, x: float) -> None:
    if not s > 0.0 or not math.isfinite(s):
        raise DomainError(f"shape s must be finite and positive, got {s!r}")
    if not x >= 0.0:
        raise DomainError(f"argument x must be nonnegative, got {x!r}")


def reg_lower_gamma(s: float, x: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s)."""
    _check_gamma_args(s, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < s + 1.0:
        return min(1.0, math.exp(_log_gamma_kernel(s, x)) * _gamma_series(s, x, ctl))
    return max(0.0, 1.0 - math.exp(_log_gamma_kernel(s, x)) * _gamma_contfrac(s, x, ctl))


def reg_upper_gamma(s: float, x: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Complement Q(s, x) = 1 - P(s, x), evaluated without cancellation."""
    _check_gamma_args(s, x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return max(0.0, 1.0 - math.exp(_log_gamma_kernel(s, x)) * _gamma_series(s, x, ctl))
    return min(1.0, math.exp(_log_gamma_kernel(s, x)) * _gamma_contfrac(s, x, ctl))


def normal_cdf(x: float) -> float:
    """Standard normal CDF via N(x) = (1 + sign(x) P(1/2, x^2/2)) / 2."""
    if math.isnan(x):
        raise DomainError("normal_cdf of NaN")
    if x >= 0.0:
        return 1.0 - 0.5 * reg_upper_gamma(0.5, 0.5 * x * x)
    return 0.5 * reg_upper_gamma(0.5, 0.5 * x * x)


def normal_sf(x: float) -> float:
    """Upper tail 1 - N(x) without cancellation for large positive x."""
    return normal_cdf(-x)


# -- modified Bessel I --------------------------------------------------------

def _log_bessel_series(nu: float, x: float, ctl: SeriesControl) -> float:
    # ascending series sum_k (x/2)^(2k+nu) / (k! Gamma(k+nu+1)), summed relative
    # to its largest term so neither overflow nor underflow can occur
    half = 0.5 * x
    q = half * half
    # largest term sits near k* solving k (k + nu) = q
    kmax = max(0, int(0.5 * (-nu + math.sqrt(nu * nu + 4.0 * q))))
    log_peak = (2 * kmax + nu) * math.log(half) - ln_gamma(kmax + 1.0) - ln_gamma(kmax + nu + 1.0)
    total = 1.0
    term = 1.0
    k = kmax
    while True:  # upward from the peak
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if term < ctl.abs_tol * 1e-2 * total:
            break
        if k - kmax > ctl.max_terms:
            raise ConvergenceError(f"Bessel series for nu={nu}, x={x} did not converge")
    term = 1.0
    k = kmax
    while k > 0:  # downward from the peak
        term *= k * (k + nu) / q
        k -= 1
        total += term
        if term < ctl.abs_tol * 1e-2 * total:
            break
        if kmax - k > ctl.max_terms:
            raise ConvergenceError(f"Bessel series for nu={nu}, x={x} did not converge")
    return log_peak + math.log(total)


def _log_bessel_asymptotic(nu: float, x: float, ctl: SeriesControl):
    # Hankel expansion e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k;
    # returns None when the terms stop shrinking before the tolerance is met
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    last = math.inf
    for k in range(1, 200):
        term *= -(mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        a = abs(term)
        if a > last:
            return None
        total += term
        if a < ctl.abs_tol * 1e-2:
            return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(total)
        last = a
    return None


def _check_bessel_args(nu: float, x: float) -> None:
    if not nu >= 0.0 or not math.isfinite(nu):
        raise DomainError(f"Bessel order must be finite and >= 0, got {nu!r}")
    if not x >= 0.0 or not math.isfinite(x):
        raise DomainError(f"Bessel argument must be finite and >= 0, got {x!r}")


def log_bessel_i(nu: float, x: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """log I_nu(x); finite for all x > 0 and -inf at x = 0 when nu > 0."""
    _check_bessel_args(nu, x)
    if x == 0.0:
        return 0.0 if nu == 0.0 else -math.inf
    if x > 50.0 and x > nu * nu:
        value = _log_bessel_asymptotic(nu, x, ctl)
        if value is not None:
            return value
    return _log_bessel_series(nu, x, ctl)


def bessel_i_scaled(nu: float, x: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Exponentially scaled e^{-x} I_nu(x)."""
    _check_bessel_args(nu, x)
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    return math.exp(log_bessel_i(nu, x, ctl) - x)


def bessel_i(nu: float, x: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Modified Bessel function of the first kind I_nu(x), nu >= 0, x >= 0.

    Overflows to ``inf`` beyond x ~ 710; use :func:`log_bessel_i` or
    :func:`bessel_i_scaled` there.
    """
    _check_bessel_args(nu, x)
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    lv = log_bessel_i(nu, x, ctl)
    return math.exp(lv) if lv < 709.0 else math.inf


# -- confluent hypergeometric ------------------------------------------------

def _is_nonpositive_integer(v: float) -> bool:
    return v <= 0.0 and v == math.floor(v)


def kummer_m(aa: float, bb: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Kummer's confluent hypergeometric function 1F1(aa; bb; z).

    Negative ``z`` goes through Kummer's transformation
    M(a, b, z) = e^z M(b - a, b, -z), which leaves at most a finite run
    of sign changes at the head of the series.
    """
    if _is_nonpositive_integer(bb):
        raise DomainError(f"kummer_m has a pole at bb={bb!r}")
    if z == 0.0:
        return 1.0
    if z < 0.0:
        return math.exp(z) * _kummer_series(bb - aa, bb, -z, ctl)
    return _kummer_series(aa, bb, z, ctl)


def _kummer_series(aa: float, bb: float, z: float, ctl: SeriesControl) -> float:
    term = 1.0
    total = 1.0
    scale = 1.0
    for n in range(ctl.max_terms):
        term *= (aa + n) * z / ((bb + n) * (n + 1))
        total += term
        scale = max(scale, abs(total))
        if term == 0.0:
            return total
        # past n ~ |z| the ratio |(aa+n) z / ((bb+n)(n+1))| is below one for good
        if abs(term) <= ctl.abs_tol * 1e-2 * scale and n + 1 > abs(z):
            return total
    raise ConvergenceError(f"1F1({aa}; {bb}; {z}) did not converge in {ctl.max_terms} terms")


def whittaker_m(kappa: float, mu: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Whittaker function M_{kappa,mu}(z) = e^{-z/2} z^{mu+1/2} 1F1(mu-kappa+1/2; 1+2mu; z)."""
    if not z > 0.0:
        raise DomainError(f"whittaker_m needs z > 0, got {z!r}")
    if _is_nonpositive_integer(1.0 + 2.0 * mu):
        raise DomainError(f"whittaker_m undefined for 1 + 2 mu = {1.0 + 2.0 * mu!r}")
    m = kummer_m(mu - kappa + 0.5, 1.0 + 2.0 * mu, z, ctl)
    return math.exp(-0.5 * z + (mu + 0.5) * math.log(z)) * m


# -- noncentral chi-squared --------------------------------------------------

def noncentral_chi2_sf(
    x: float, df: float, lam: float, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Survival function Q(x; df, lam) of the noncentral chi-squared law.

    Poisson(lam/2) mixture of central chi-squared survival functions,
    summed outward from the modal Poisson index. The central terms are
    advanced by the exact recurrence
    Q(s+1, y) = Q(s, y) + y^s e^{-y} / Gamma(s+1), carried in log space.
    """
    if not df > 0.0 or not math.isfinite(df):
        raise DomainError(f"df must be finite and positive, got {df!r}")
    if not lam >= 0.0 or not math.isfinite(lam):
        raise DomainError(f"noncentrality must be finite and >= 0, got {lam!r}")
    if not x >= 0.0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    y = 0.5 * x
    s0 = 0.5 * df
    if lam == 0.0:
        return reg_upper_gamma(s0, y, ctl)

    mu = 0.5 * lam
    log_mu = math.log(mu)
    log_y = math.log(y)
    tol = ctl.abs_tol
    jm = int(mu)

    # Poisson weight and central survival at the mode
    log_w_mode = _log_gamma_kernel(jm + 1.0, mu) - log_mu
    u_mode = reg_upper_gamma(s0 + jm, y, ctl)
    # log of y^s e^{-y} / Gamma(s+1) at s = s0 + jm
    log_g_mode = _log_gamma_kernel(s0 + jm + 1.0, y) - log_y

    total = math.exp(log_w_mode) * u_mode

    # upward: j = jm+1, jm+2, ...; max_terms bounds each direction separately
    log_w, u, log_g, j = log_w_mode, u_mode, log_g_mode, jm
    terms = 0
    while True:
        u = min(1.0, u + math.exp(log_g))
        log_g += log_y - math.log(s0 + j + 1.0)
        log_w += log_mu - math.log(j + 1.0)
        j += 1
        w = math.exp(log_w)
        total += w * u
        terms += 1
        if j + 1 > mu:
            ratio = mu / (j + 1.0)
            if w * ratio / (1.0 - ratio) <= tol:
                break
        if terms > ctl.max_terms:
            raise ConvergenceError(
                f"noncentral chi2 series (x={x}, df={df}, lam={lam}) did not converge"
            )

    # downward: j = jm-1, ..., 0
    log_w, u, log_g, j = log_w_mode, u_mode, log_g_mode, jm
    terms = 0
    while j > 0:
        # g at s-1 is g(s) * s / y
        log_g += math.log(s0 + j) - log_y
        u = max(0.0, u - math.exp(log_g))
        log_w += math.log(j) - log_mu
        j -= 1
        w = math.exp(log_w)
        total += w * u
        terms += 1
        if j < mu:
            ratio = j / mu
            if ratio < 1.0 and w * ratio / (1.0 - ratio) <= tol:
                break
        if terms > ctl.max_terms:
            raise ConvergenceError(
                f"noncentral chi2 series (x={x}, df={df}, lam={lam}) did not converge"
            )
    return min(1.0, max(0.0, total))


def q_normal_limit(n: float, v: float, lam: float) -> float:
    """Normal approximation 1 - N((n - v - lam) / sqrt(2 (v + 2 lam))) to Q(n; v, lam)."""
    spread = v + 2.0 * lam
    if not spread > 0.0:
        raise DomainError(f"need v + 2 lam > 0, got {spread!r}")
    return normal_sf((n - v - lam) / math.sqrt(2.0 * spread))
