"""Likelihood matrix construction and default support grids."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import EmptyData, ZeroLikelihoodRow
from .pmf import density_row
from .types import (
    BinomialSampleSize,
    LikelihoodMatrix,
    Observation,
    OutcomeTable,
    Scenario,
    SupportGrid,
    ThetaPoint,
)

# probabilities this close to {0, 1} make binomial support points degenerate
_BINOMIAL_EDGE = 0.025
_POISSON_RATE_MIN = 0.01


def build_likelihood_matrix(
    obs: Sequence[Observation],
    grid: SupportGrid,
    counts: np.ndarray | None = None,
) -> LikelihoodMatrix:
    """Evaluate every observation's component density across the grid.

    Raises ZeroLikelihoodRow when some observation has zero probability under
    every grid point (the grid range excludes the data).
    """
    obs = list(obs)
    if not obs:
        raise EmptyData("need at least one observation to build a likelihood matrix")
    grid.scenario.validate(obs)
    L = np.empty((len(obs), len(grid)))
    scales = np.empty(len(obs))
    for i, y in enumerate(obs):
        row, scale = density_row(y, grid)
        if not math.isfinite(scale):
            raise ZeroLikelihoodRow(i)
        L[i] = row
        scales[i] = scale
    if counts is None:
        counts = np.ones(len(obs), dtype=np.int64)
    return LikelihoodMatrix(L, scales, counts)


def build_outcome_matrix(table: OutcomeTable, grid: SupportGrid) -> LikelihoodMatrix:
    """Likelihood matrix over distinct outcomes, rows weighted by multiplicity."""
    return build_likelihood_matrix(table.outcomes, grid, counts=table.counts)


def product_grid(
    scenario: Scenario, t1_values: Sequence[float], t2_values: Sequence[float]
) -> SupportGrid:
    """Cartesian support grid; axes are (pi, p) or the two Poisson rates."""
    if isinstance(scenario, BinomialSampleSize):
        points = [ThetaPoint(float(a), float(b)) for a in t1_values for b in t2_values]
    else:
        points = [ThetaPoint.from_rates(a, b) for a in t1_values for b in t2_values]
    return SupportGrid(scenario, tuple(points), dims=(len(t1_values), len(t2_values)))


def _clamp_probability_range(lo: float, hi: float) -> tuple[float, float]:
    lo = min(max(lo, _BINOMIAL_EDGE), 1.0 - _BINOMIAL_EDGE)
    hi = min(max(hi, _BINOMIAL_EDGE), 1.0 - _BINOMIAL_EDGE)
    if not lo < hi:
        raise ValueError(f"grid range collapsed after boundary clamping: [{lo}, {hi}]")
    return lo, hi


def default_grid(
    scenario: Scenario,
    obs: Sequence[Observation],
    dims: tuple[int, int] = (40, 40),
    *,
    t1min: float | None = None,
    t1max: float | None = None,
    t2min: float | None = None,
    t2max: float | None = None,
) -> SupportGrid:
    """Equally spaced product grid over a range that covers the data.

    Binomial axes span [0.025, 0.975] (explicit ranges are clamped into that
    box to avoid degenerate boundary probabilities).  Poisson rate axes span
    [0.01, max realized sample size] unless overridden.
    """
    n1, n2 = dims
    if n1 < 2 or n2 < 2:
        raise ValueError(f"grid needs at least 2 points per axis, got {dims}")
    obs = list(obs)
    explicit = (t1min is not None and t1max is not None
                and t2min is not None and t2max is not None)
    if not obs and not explicit:
        raise EmptyData("no observations and no explicit grid range")
    if isinstance(scenario, BinomialSampleSize):
        lo1, hi1 = _clamp_probability_range(
            0.0 if t1min is None else t1min, 1.0 if t1max is None else t1max
        )
        lo2, hi2 = _clamp_probability_range(
            0.0 if t2min is None else t2min, 1.0 if t2max is None else t2max
        )
    else:
        kmax = max((o.k for o in obs), default=0)
        lo1 = _POISSON_RATE_MIN if t1min is None else t1min
        hi1 = float(kmax) if t1max is None else t1max
        lo2 = _POISSON_RATE_MIN if t2min is None else t2min
        hi2 = float(kmax) if t2max is None else t2max
        if lo1 <= 0 or lo2 <= 0:
            raise ValueError("Poisson rate grids must exclude zero rates")
        if not (lo1 < hi1 and lo2 < hi2):
            raise EmptyData(
                "cannot size a rate grid from this data; give an explicit range"
            )
    t1_values = np.linspace(lo1, hi1, n1)
    t2_values = np.linspace(lo2, hi2, n2)
    return product_grid(scenario, t1_values, t2_values)
