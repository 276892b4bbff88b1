"""Simulation designs, replicated estimator comparisons, and data thinning."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .em import EmConfig
from .errors import EstimationError
from .estimators import fit_report
from .thresholds import GeneralStratum
from .types import (
    BinomialSampleSize,
    GridSpec,
    Observation,
    PoissonSampleSize,
    Scenario,
)

ESTIMATOR_NAMES = ("naive", "extreme_collapse", "gmle", "psi_star")


@dataclass(frozen=True)
class PointMass:
    v: float

    def mean(self) -> float:
        return self.v

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.v)


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size)


Law = PointMass | Uniform


@dataclass(frozen=True)
class DesignGroup:
    """A block of strata sharing laws for the latent pair; draws are independent."""

    count: int
    theta1: Law
    theta2: Law

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"group size must be positive, got {self.count}")
        lo = self.theta2.v if isinstance(self.theta2, PointMass) else self.theta2.lo
        hi = self.theta2.v if isinstance(self.theta2, PointMass) else self.theta2.hi
        if lo < 0 or hi > 1:
            raise ValueError("success probability law must stay inside [0, 1]")


@dataclass(frozen=True)
class StrataDesign:
    groups: tuple[DesignGroup, ...]
    scenario: Scenario

    def __post_init__(self):
        if not self.groups:
            raise ValueError("design needs at least one group")
        object.__setattr__(self, "groups", tuple(self.groups))

    @property
    def n_strata(self) -> int:
        return sum(g.count for g in self.groups)

    def true_p(self) -> float:
        """Population mean success probability, computed from the laws."""
        total = sum(g.count * g.theta2.mean() for g in self.groups)
        return total / self.n_strata


@dataclass(frozen=True)
class EstimatorStats:
    mean: float
    sd: float | None  # None with a single replication


@dataclass(frozen=True)
class SimSummary:
    per_estimator: Mapping[str, EstimatorStats]
    reps: int
    seed: int
    true_p: float


def _replicate_rng(seed: int, rep: int) -> np.random.Generator:
    # per-replicate streams derived from the master seed keep replications
    # reproducible regardless of execution order
    return np.random.default_rng(np.random.SeedSequence([seed, rep]))


def _draw(design: StrataDesign, rng: np.random.Generator) -> list[Observation]:
    obs: list[Observation] = []
    binomial = isinstance(design.scenario, BinomialSampleSize)
    for g in design.groups:
        t1 = g.theta1.sample(rng, g.count)
        t2 = g.theta2.sample(rng, g.count)
        if binomial:
            k = rng.binomial(design.scenario.kappa, t1)
        else:
            k = rng.poisson(t1)
        x = rng.binomial(k, t2)
        obs.extend(Observation(int(xi), int(ki)) for xi, ki in zip(x, k))
    return obs


def draw_dataset(design: StrataDesign, seed: int) -> list[Observation]:
    """One dataset from the design; deterministic given the seed."""
    return _draw(design, np.random.default_rng(np.random.SeedSequence(seed)))


def _one_replicate(
    design: StrataDesign,
    rep: int,
    seed: int,
    em_cfg: EmConfig | None,
    grid_spec: GridSpec | None,
) -> tuple[float, float, float, float]:
    obs = _draw(design, _replicate_rng(seed, rep))
    try:
        rep_fit = fit_report(obs, design.scenario, grid_spec=grid_spec, em_cfg=em_cfg)
    except EstimationError as e:
        raise EstimationError(f"replicate {rep}: {e}") from e
    r = rep_fit.report
    naive = np.nan if r.naive is None else r.naive
    return naive, r.extreme_collapse, r.gmle_plugin, r.psi_star


def run_replications(
    design: StrataDesign,
    reps: int,
    em_cfg: EmConfig | None = None,
    grid_spec: GridSpec | None = None,
    seed: int = 0,
    threads: int = 1,
) -> SimSummary:
    """Replicated comparison of all estimators under one design.

    Results are independent of the thread count: every replicate owns a
    derived RNG stream and the reduction runs over the stored per-replicate
    values in index order.
    """
    if reps < 1:
        raise ValueError(f"need at least one replication, got {reps}")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(
                pool.map(
                    lambda r: _one_replicate(design, r, seed, em_cfg, grid_spec),
                    range(reps),
                )
            )
    else:
        rows = [_one_replicate(design, r, seed, em_cfg, grid_spec) for r in range(reps)]
    values = np.asarray(rows)
    per = {}
    for j, name in enumerate(ESTIMATOR_NAMES):
        col = values[:, j]
        sd = float(np.std(col, ddof=1)) if reps >= 2 else None
        per[name] = EstimatorStats(float(np.mean(col)), sd)
    return SimSummary(per, reps, seed, design.true_p())


def thin_dataset(data: Sequence, gamma: float, seed: int = 0) -> list:
    """Keep each observed unit independently with probability gamma.

    Summary-level observations are thinned exactly as unit-level data would
    be: the retained sample size is Binomial(k, gamma) and the retained
    successes are hypergeometric given that size.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    data = list(data)
    if not data:
        return []
    if isinstance(data[0], GeneralStratum):
        out = []
        for s in data:
            keep = rng.random(s.k) < gamma
            out.append(GeneralStratum(s.a, tuple(np.asarray(s.values)[keep])))
        return out
    thinned = []
    for o in data:
        if o.k == 0:
            thinned.append(Observation(0, 0))
            continue
        k_new = int(rng.binomial(o.k, gamma))
        x_new = int(rng.hypergeometric(o.x, o.k - o.x, k_new)) if k_new > 0 else 0
        thinned.append(Observation(x_new, k_new))
    return thinned


def _two_types(
    scenario: Scenario,
    type1: tuple[Law, Law],
    type2: tuple[Law, Law],
    count: int = 500,
) -> StrataDesign:
    return StrataDesign(
        (
            DesignGroup(count, type1[0], type1[1]),
            DesignGroup(count, type2[0], type2[1]),
        ),
        scenario,
    )


def _binomial_symmetric(p1: float, kappa: int = 5) -> StrataDesign:
    # response probability tied to the success probability within each type
    return _two_types(
        BinomialSampleSize(kappa),
        (PointMass(p1), PointMass(p1)),
        (PointMass(1.0 - p1), PointMass(1.0 - p1)),
    )


def _binomial_continuous(kappa: int) -> StrataDesign:
    return _two_types(
        BinomialSampleSize(kappa),
        (Uniform(0.1, 0.6), Uniform(0.1, 0.6)),
        (Uniform(0.4, 0.9), Uniform(0.4, 0.9)),
    )


PRESETS: dict[str, StrataDesign] = {
    # Poisson sample sizes, two-point latent distribution
    "t1r1": _two_types(
        PoissonSampleSize(), (PointMass(2.0), PointMass(0.4)), (PointMass(1.0), PointMass(0.6))
    ),
    "t1r2": _two_types(
        PoissonSampleSize(), (PointMass(2.0), PointMass(0.2)), (PointMass(1.0), PointMass(0.8))
    ),
    "t1r3": _two_types(
        PoissonSampleSize(), (PointMass(2.0), PointMass(0.2)), (PointMass(0.5), PointMass(0.8))
    ),
    # Poisson sample sizes, continuous rate laws with complementary fixed p
    "t2r1": _two_types(
        PoissonSampleSize(), (Uniform(0.5, 1.0), PointMass(0.4)), (Uniform(0.5, 2.0), PointMass(0.6))
    ),
    "t2r2": _two_types(
        PoissonSampleSize(), (Uniform(0.5, 1.0), PointMass(0.3)), (Uniform(0.5, 2.0), PointMass(0.7))
    ),
    "t2r3": _two_types(
        PoissonSampleSize(), (Uniform(0.5, 1.0), PointMass(0.2)), (Uniform(0.5, 2.0), PointMass(0.8))
    ),
    # binomial sample sizes, response tied to success within each type
    "t3r1": _binomial_symmetric(0.2),
    "t3r2": _binomial_symmetric(0.3),
    "t3r3": _binomial_symmetric(0.4),
    # binomial sample sizes, independent continuous laws, planned size 1..5
    "t4k1": _binomial_continuous(1),
    "t4k2": _binomial_continuous(2),
    "t4k3": _binomial_continuous(3),
    "t4k4": _binomial_continuous(4),
    "t4k5": _binomial_continuous(5),
    # synthetic stand-in for a small municipal survey: 156 strata of a few
    # thousand residents each, Poisson sample sizes averaging ~8 interviews
    "survey156": StrataDesign(
        (DesignGroup(156, Uniform(2.0, 14.0), Uniform(0.25, 0.65)),),
        PoissonSampleSize(),
    ),
}
