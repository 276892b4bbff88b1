"""Core domain types: observations, sampling scenarios, support grids, weights."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

_SIMPLEX_TOL = 1e-12


@dataclass(frozen=True, order=True)
class Observation:
    """One stratum's realized sample: x successes out of k sampled units."""

    x: int
    k: int

    def __post_init__(self):
        if self.x < 0 or self.k < 0:
            raise ValueError(f"counts must be nonnegative, got (x={self.x}, k={self.k})")
        if self.x > self.k:
            raise ValueError(f"success count x={self.x} exceeds sample size k={self.k}")


@dataclass(frozen=True)
class BinomialSampleSize:
    """Realized sample sizes are Binomial(kappa, theta1) with a common planned size."""

    kappa: int

    def __post_init__(self):
        if self.kappa < 1:
            raise ValueError(f"planned sample size must be positive, got {self.kappa}")

    def validate(self, obs: Iterable[Observation]) -> None:
        for i, o in enumerate(obs):
            if o.k > self.kappa:
                raise ValueError(
                    f"stratum {i}: realized size k={o.k} exceeds planned size {self.kappa}"
                )


@dataclass(frozen=True)
class PoissonSampleSize:
    """Realized sample sizes are Poisson(theta1)."""

    def validate(self, obs: Iterable[Observation]) -> None:
        return None


Scenario = BinomialSampleSize | PoissonSampleSize


@dataclass(frozen=True)
class ThetaPoint:
    """A latent support point.

    theta1 is the sampling-intensity coordinate (response probability under
    binomial sampling, total rate under Poisson sampling) and theta2 the
    success probability.  Poisson points are constructed from the pair of
    per-outcome rates via :meth:`from_rates` and keep them in ``xi``.
    """

    theta1: float
    theta2: float
    xi: tuple[float, float] | None = None

    def __post_init__(self):
        if not np.isfinite(self.theta1) or self.theta1 < 0:
            raise ValueError(f"theta1 must be finite and nonnegative, got {self.theta1}")
        if not 0.0 <= self.theta2 <= 1.0:
            raise ValueError(f"theta2 must lie in [0, 1], got {self.theta2}")
        if self.xi is not None:
            x1, x2 = self.xi
            if x1 < 0 or x2 < 0 or x1 + x2 <= 0:
                raise ValueError(f"rates must be nonnegative with positive sum, got {self.xi}")

    @classmethod
    def from_rates(cls, xi1: float, xi2: float) -> "ThetaPoint":
        """Build a Poisson point from (success rate, failure rate)."""
        xi1, xi2 = float(xi1), float(xi2)
        if xi1 < 0 or xi2 < 0 or xi1 + xi2 <= 0:
            raise ValueError(f"rates must be nonnegative with positive sum, got ({xi1}, {xi2})")
        total = xi1 + xi2
        return cls(total, xi1 / total, (xi1, xi2))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SupportGrid:
    """Finite candidate support for the mixing distribution.

    Coordinate arrays are precomputed once; Poisson grids additionally carry
    the rate arrays ``xi1s``/``xi2s``.
    """

    scenario: Scenario
    points: tuple[ThetaPoint, ...]
    dims: tuple[int, int] | None = None
    theta1s: np.ndarray = field(init=False, repr=False, compare=False)
    theta2s: np.ndarray = field(init=False, repr=False, compare=False)
    xi1s: np.ndarray | None = field(init=False, repr=False, compare=False)
    xi2s: np.ndarray | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.points:
            raise ValueError("grid must contain at least one point")
        object.__setattr__(self, "points", tuple(self.points))
        if len(set(self.points)) != len(self.points):
            raise ValueError("grid points must be distinct")
        poisson = isinstance(self.scenario, PoissonSampleSize)
        for p in self.points:
            if poisson and p.xi is None:
                raise ValueError("Poisson grids require points built via ThetaPoint.from_rates")
            if not poisson and p.theta1 > 1.0:
                raise ValueError(f"binomial response probability above 1: {p.theta1}")
        object.__setattr__(
            self, "theta1s", _readonly(np.array([p.theta1 for p in self.points]))
        )
        object.__setattr__(
            self, "theta2s", _readonly(np.array([p.theta2 for p in self.points]))
        )
        if poisson:
            object.__setattr__(
                self, "xi1s", _readonly(np.array([p.xi[0] for p in self.points]))
            )
            object.__setattr__(
                self, "xi2s", _readonly(np.array([p.xi[1] for p in self.points]))
            )
        else:
            object.__setattr__(self, "xi1s", None)
            object.__setattr__(self, "xi2s", None)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MixingWeights:
    """Probability vector over the grid points."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must form a nonempty 1-D vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if abs(float(w.sum()) - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"weights must sum to 1 within {_SIMPLEX_TOL}, got {w.sum()!r}")
        object.__setattr__(self, "w", _readonly(w))

    @classmethod
    def uniform(cls, size: int) -> "MixingWeights":
        return cls(np.full(size, 1.0 / size))

    def __len__(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class LikelihoodMatrix:
    """Component densities of each observation row across the grid columns.

    Rows are rescaled to unit maximum; ``row_scale`` holds the log of the
    removed factor.  ``counts`` carries per-row multiplicities so collapsed
    (distinct-outcome) matrices behave exactly like their expanded form.
    """

    L: np.ndarray
    row_scale: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.L, dtype=np.float64)
        scale = np.asarray(self.row_scale, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if L.ndim != 2 or L.size == 0:
            raise ValueError("likelihood matrix must be a nonempty 2-D array")
        if scale.shape != (L.shape[0],) or counts.shape != (L.shape[0],):
            raise ValueError("row_scale and counts must have one entry per row")
        if not np.all(np.isfinite(L)) or np.any(L < 0):
            raise ValueError("likelihood entries must be finite and nonnegative")
        if not np.all(np.isfinite(scale)):
            raise ValueError("row scales must be finite")
        if np.any(L.max(axis=1) <= 0):
            raise ValueError("likelihood matrix contains an all-zero row")
        if np.any(counts < 1):
            raise ValueError("row counts must be positive")
        object.__setattr__(self, "L", _readonly(L))
        object.__setattr__(self, "row_scale", _readonly(scale))
        object.__setattr__(self, "counts", _readonly(counts))

    @property
    def n(self) -> int:
        """Number of observations represented (sum of row multiplicities)."""
        return int(self.counts.sum())


@dataclass(frozen=True)
class OutcomeTable:
    """Distinct observed outcomes with their multiplicities."""

    outcomes: tuple[Observation, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.outcomes) == 0 or counts.shape != (len(self.outcomes),):
            raise ValueError("outcomes and counts must be nonempty and aligned")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError("outcomes must be distinct")
        if np.any(counts < 1):
            raise ValueError("every listed outcome needs a positive count")
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "counts", _readonly(counts))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n

    @classmethod
    def from_observations(cls, obs: Sequence[Observation]) -> "OutcomeTable":
        return collapse_observations(obs)[0]


def collapse_observations(
    obs: Sequence[Observation],
) -> tuple[OutcomeTable, np.ndarray]:
    """Group identical observations.

    Returns the outcome table plus the index of each original observation's
    row in it, so per-stratum quantities can be expanded back.
    """
    if len(obs) == 0:
        raise ValueError("need at least one observation")
    counter = Counter(obs)
    outcomes = sorted(counter)
    counts = np.array([counter[o] for o in outcomes], dtype=np.int64)
    index = {o: j for j, o in enumerate(outcomes)}
    inverse = np.fromiter((index[o] for o in obs), dtype=np.int64, count=len(obs))
    return OutcomeTable(tuple(outcomes), counts), inverse


@dataclass(frozen=True)
class GridSpec:
    """Grid shape and optional range overrides; None means the scenario default."""

    n1: int = 40
    n2: int = 40
    t1min: float | None = None
    t1max: float | None = None
    t2min: float | None = None
    t2max: float | None = None

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("grid needs at least 2 points per axis")

    def build(self, scenario: Scenario, obs: Sequence[Observation]) -> SupportGrid:
        from .likelihood import default_grid

        return default_grid(
            scenario,
            obs,
            dims=(self.n1, self.n2),
            t1min=self.t1min,
            t1max=self.t1max,
            t2min=self.t2min,
            t2max=self.t2max,
        )
