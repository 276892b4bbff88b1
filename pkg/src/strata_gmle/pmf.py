"""Component probability mass functions for both sampling scenarios.

Small-count cases are evaluated directly, which keeps the boundary
conventions exact (0^0 = 1, mass 1 at zero for a zero rate); large counts
switch to log space.  Grid-row kernels rescale each row to unit maximum and
report the removed log factor.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import xlog1py, xlogy

from .types import BinomialSampleSize, Observation, PoissonSampleSize, Scenario, SupportGrid

_DIRECT_N_MAX = 170  # largest factorial representable in double precision
_LOG_FLOOR = -700.0  # raw row maxima below exp of this count as zero rows


def binomial_pmf(x: int, n: int, p: float) -> float:
    """P(X = x) for X ~ Binomial(n, p), with 0^0 = 1."""
    if x < 0 or n < 0:
        raise ValueError(f"counts must be nonnegative, got x={x}, n={n}")
    if x > n:
        raise ValueError(f"success count x={x} exceeds trial count n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if n <= _DIRECT_N_MAX:
        out = math.comb(n, x) * p**x * (1.0 - p) ** (n - x)
        if out > 0.0 or p == 0.0 or p == 1.0:
            return out
    if p == 0.0:
        return 1.0 if x == 0 else 0.0
    if p == 1.0:
        return 1.0 if x == n else 0.0
    logp = (
        math.lgamma(n + 1)
        - math.lgamma(x + 1)
        - math.lgamma(n - x + 1)
        + x * math.log(p)
        + (n - x) * math.log1p(-p)
    )
    return math.exp(logp)


def poisson_pmf(k: int, lam: float) -> float:
    """P(K = k) for K ~ Poisson(lam), with unit mass at zero when lam = 0."""
    if k < 0:
        raise ValueError(f"count must be nonnegative, got {k}")
    if not lam >= 0.0:
        raise ValueError(f"rate must be nonnegative, got {lam}")
    if lam == 0.0:
        return 1.0 if k == 0 else 0.0
    if k == 0:
        return math.exp(-lam)
    if k <= _DIRECT_N_MAX and k * math.log(lam) < 700.0:
        out = lam**k * math.exp(-lam) / math.factorial(k)
        if out > 0.0:
            return out
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))


def component_density(y: Observation, theta, scenario: Scenario) -> float:
    """Probability of observing y = (x, k) from a stratum with latent theta."""
    if isinstance(scenario, BinomialSampleSize):
        if y.k > scenario.kappa:
            raise ValueError(f"realized size k={y.k} exceeds planned size {scenario.kappa}")
        if theta.theta1 > 1.0:
            raise ValueError(f"response probability above 1: {theta.theta1}")
        return binomial_pmf(y.k, scenario.kappa, theta.theta1) * binomial_pmf(
            y.x, y.k, theta.theta2
        )
    if theta.xi is not None:
        xi1, xi2 = theta.xi
    else:
        xi1 = theta.theta1 * theta.theta2
        xi2 = theta.theta1 * (1.0 - theta.theta2)
    return poisson_pmf(y.x, xi1) * poisson_pmf(y.k - y.x, xi2)


def _binomial_pmf_vec(x: int, n: int, p: np.ndarray) -> np.ndarray:
    # integer exponents make numpy evaluate 0**0 as 1, matching the convention
    return math.comb(n, x) * p**x * (1.0 - p) ** (n - x)


def _log_binomial_pmf_vec(x: int, n: int, p: np.ndarray) -> np.ndarray:
    lcomb = math.lgamma(n + 1) - math.lgamma(x + 1) - math.lgamma(n - x + 1)
    return lcomb + xlogy(x, p) + xlog1py(n - x, -p)


def _log_poisson_vec(c: int, xi: np.ndarray) -> np.ndarray:
    if c == 0:
        return -xi
    with np.errstate(divide="ignore"):
        return xlogy(c, xi) - xi - math.lgamma(c + 1)


def density_row(y: Observation, grid: SupportGrid) -> tuple[np.ndarray, float]:
    """Component densities of one observation across the grid.

    Returns (row rescaled to unit maximum, log of the removed factor); the
    scale is -inf when every density is zero or beyond double range.
    """
    if isinstance(grid.scenario, BinomialSampleSize):
        kappa = grid.scenario.kappa
        if y.k > kappa:
            raise ValueError(f"realized size k={y.k} exceeds planned size {kappa}")
        if kappa <= _DIRECT_N_MAX:
            raw = _binomial_pmf_vec(y.k, kappa, grid.theta1s) * _binomial_pmf_vec(
                y.x, y.k, grid.theta2s
            )
            m = float(raw.max())
            if m > 0.0:
                return raw / m, math.log(m)
            return raw, -math.inf
        logrow = _log_binomial_pmf_vec(y.k, kappa, grid.theta1s) + _log_binomial_pmf_vec(
            y.x, y.k, grid.theta2s
        )
    else:
        if y.k == 0:
            raw = np.exp(-(grid.xi1s + grid.xi2s))
            m = float(raw.max())
            return raw / m, math.log(m)
        logrow = _log_poisson_vec(y.x, grid.xi1s) + _log_poisson_vec(y.k - y.x, grid.xi2s)
    m = float(logrow.max())
    if not math.isfinite(m) or m < _LOG_FLOOR:
        return np.zeros(len(grid)), -math.inf
    return np.exp(logrow - m), m
