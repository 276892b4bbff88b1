"""Weighted nonnegative outcomes via threshold reduction to binary problems.

A nonnegative mean equals the integral of its survival function, so the mean
of the weighted outcomes Z = a * X is estimated by fitting the binary
pipeline at a ladder of thresholds c and integrating the fitted exceedance
probabilities over c.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .em import EmConfig
from .errors import AllStrataEmpty, EstimationError
from .estimators import fit_report
from .types import GridSpec, Observation, Scenario, SupportGrid


@dataclass(frozen=True)
class GeneralStratum:
    """Stratum weight and raw per-unit values; an empty tuple means no sample."""

    a: float
    values: tuple[float, ...]

    def __post_init__(self):
        if self.a < 0:
            raise ValueError(f"stratum weight must be nonnegative, got {self.a}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if any(v < 0 for v in self.values):
            raise ValueError(
                "negative outcomes are not supported: the mean-as-survival-"
                "integral representation needs Z >= 0"
            )

    @property
    def k(self) -> int:
        return len(self.values)

    def z_values(self) -> np.ndarray:
        return self.a * np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class ThresholdPlan:
    """Strictly increasing thresholds starting at 0, covering [0, max Z]."""

    thresholds: tuple[float, ...]
    z_max: float
    max_thresholds: int

    def __post_init__(self):
        t = self.thresholds
        if not t or t[0] != 0.0:
            raise ValueError("threshold ladder must start at 0")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("thresholds must be strictly increasing")
        if t[-1] > self.z_max:
            raise ValueError("thresholds must not exceed the largest observed value")


def _pooled_z(strata: Sequence[GeneralStratum]) -> np.ndarray:
    parts = [s.z_values() for s in strata if s.k > 0]
    if not parts:
        raise AllStrataEmpty("every stratum is empty")
    return np.concatenate(parts)


def build_threshold_plan(
    strata: Sequence[GeneralStratum], max_thresholds: int = 100
) -> ThresholdPlan:
    """Thresholds at 0 and every distinct observed Z except the maximum
    (indicators above the maximum are identically zero); ladders longer than
    the cap are thinned to empirical quantiles."""
    if max_thresholds < 1:
        raise ValueError(f"max_thresholds must be positive, got {max_thresholds}")
    z = _pooled_z(strata)
    z_max = float(z.max())
    distinct = np.unique(z)
    cands = sorted({0.0} | {float(v) for v in distinct if v < z_max})
    if len(cands) > max_thresholds:
        qs = np.quantile(z, np.arange(1, max_thresholds) / max_thresholds)
        cands = sorted({0.0} | {float(q) for q in qs if q < z_max})
    return ThresholdPlan(tuple(cands), z_max, max_thresholds)


def binary_reduce(strata: Sequence[GeneralStratum], c: float) -> list[Observation]:
    """Per stratum, the count of weighted values above c out of its sample size."""
    if c < 0:
        raise ValueError(f"threshold must be nonnegative, got {c}")
    return [Observation(int(np.sum(s.z_values() > c)), s.k) for s in strata]


@dataclass(frozen=True)
class ThresholdCurve:
    """Fitted exceedance probabilities along the ladder, raw and monotonized."""

    thresholds: tuple[float, ...]
    raw: np.ndarray
    monotone: np.ndarray
    z_max: float

    @property
    def max_violation(self) -> float:
        """Largest raw increase over a step; survival functions should not rise."""
        return float(np.max(self.raw - self.monotone))

    def integrate(self) -> float:
        gaps = np.diff(np.append(self.thresholds, self.z_max))
        return float(self.monotone @ gaps)


def threshold_curve(
    strata: Sequence[GeneralStratum],
    scenario: Scenario,
    grid_spec: GridSpec | None = None,
    em_cfg: EmConfig | None = None,
    plan: ThresholdPlan | None = None,
    max_thresholds: int = 100,
) -> ThresholdCurve:
    """Fit the binary pipeline at every threshold.

    Independent fits need not be monotone in c, so the curve is also returned
    with a running-minimum cleanup applied.
    """
    strata = list(strata)
    if plan is None:
        plan = build_threshold_plan(strata, max_thresholds)
    # the grid depends only on the realized sample sizes, which every
    # threshold's binary problem shares, so one grid serves the whole ladder
    base_obs = binary_reduce(strata, plan.thresholds[0])
    grid = (grid_spec or GridSpec()).build(scenario, base_obs)
    raw = np.empty(len(plan.thresholds))
    for t, c in enumerate(plan.thresholds):
        obs = base_obs if t == 0 else binary_reduce(strata, c)
        try:
            raw[t] = fit_report(obs, scenario, grid=grid, em_cfg=em_cfg).report.gmle_plugin
        except EstimationError as e:
            raise EstimationError(f"threshold c={c:g}: {e}") from e
    return ThresholdCurve(plan.thresholds, raw, np.minimum.accumulate(raw), plan.z_max)


def general_estimate(
    strata: Sequence[GeneralStratum],
    scenario: Scenario,
    grid_spec: GridSpec | None = None,
    em_cfg: EmConfig | None = None,
    plan: ThresholdPlan | None = None,
    max_thresholds: int = 100,
) -> float:
    """Estimated mean of the weighted outcomes: the monotonized exceedance
    curve integrated over the threshold ladder."""
    curve = threshold_curve(strata, scenario, grid_spec, em_cfg, plan, max_thresholds)
    return curve.integrate()
