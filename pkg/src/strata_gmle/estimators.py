"""Point estimators of the mean success probability and per-stratum posteriors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .em import EmConfig, EmResult, fit_gmle
from .errors import AllStrataEmpty, EmptyData, NumericalUnderflow, ZeroLikelihoodRow
from .likelihood import build_outcome_matrix
from .pmf import density_row
from .types import (
    GridSpec,
    LikelihoodMatrix,
    MixingWeights,
    Observation,
    OutcomeTable,
    Scenario,
    SupportGrid,
    collapse_observations,
)

# maps grid coordinates to the quantity whose mixture mean is estimated;
# the default target is the success probability itself
Eta = Callable[[SupportGrid], np.ndarray]


def _eta_values(grid: SupportGrid, eta: Eta | None) -> np.ndarray:
    return grid.theta2s if eta is None else np.asarray(eta(grid), dtype=np.float64)


def naive_estimator(obs: Sequence[Observation]) -> float:
    """Average of x/k over strata with a realized sample."""
    ratios = [o.x / o.k for o in obs if o.k > 0]
    if not ratios:
        raise AllStrataEmpty("no stratum has a realized sample")
    return sum(ratios) / len(ratios)


def extreme_collapse(obs: Sequence[Observation]) -> float:
    """Pooled ratio after collapsing all strata into one."""
    k_total = sum(o.k for o in obs)
    if k_total == 0:
        raise AllStrataEmpty("no stratum has a realized sample")
    return sum(o.x for o in obs) / k_total


def gmle_plugin(grid: SupportGrid, w: MixingWeights, eta: Eta | None = None) -> float:
    """Plug-in mixture mean of the target coordinate under the fitted weights."""
    return float(w.w @ _eta_values(grid, eta))


def posterior_mean(
    y: Observation,
    grid: SupportGrid,
    w: MixingWeights,
    L_row: np.ndarray,
    eta: Eta | None = None,
) -> float:
    """Posterior expectation of the target coordinate given one observation."""
    weighted = np.asarray(L_row, dtype=np.float64) * w.w
    denom = float(weighted.sum())
    if denom <= 0.0:
        raise NumericalUnderflow("observation has zero mixture density")
    return float(weighted @ _eta_values(grid, eta)) / denom


def posterior_means(
    L: LikelihoodMatrix, grid: SupportGrid, w: MixingWeights, eta: Eta | None = None
) -> np.ndarray:
    """Posterior means for every row of a likelihood matrix."""
    denom = L.L @ w.w
    if np.any(denom <= 0.0):
        raise NumericalUnderflow("some observation has zero mixture density")
    return (L.L @ (w.w * _eta_values(grid, eta))) / denom


def psi_star_estimator(
    obs: Sequence[Observation], grid: SupportGrid, w: MixingWeights
) -> float:
    """Hybrid estimator: x/k for observed strata, the posterior mean of the
    success probability given an empty sample for the rest."""
    obs = list(obs)
    if not obs:
        raise EmptyData("need at least one stratum")
    observed_sum = sum(o.x / o.k for o in obs if o.k > 0)
    m_zero = sum(1 for o in obs if o.k == 0)
    if m_zero:
        row, _ = density_row(Observation(0, 0), grid)
        empty_part = m_zero * posterior_mean(Observation(0, 0), grid, w, row)
    else:
        empty_part = 0.0
    return (observed_sum + empty_part) / len(obs)


def agreement_check(
    grid: SupportGrid,
    w: MixingWeights,
    obs: Sequence[Observation],
    L: LikelihoodMatrix,
) -> float:
    """|plug-in mean - average posterior mean|.

    Zero (to numerical precision) whenever w is an EM fixed point; a positive
    value off fixed points is diagnostic, not an error.
    """
    pm = posterior_means(L, grid, w)
    avg = float(L.counts @ pm) / L.n
    return abs(gmle_plugin(grid, w) - avg)


@dataclass(frozen=True)
class EstimateReport:
    """All point estimates for one dataset.

    naive is None when every stratum is empty of observed units with k > 0.
    posterior_means is aligned with the input stratum order.
    """

    naive: float | None
    extreme_collapse: float
    gmle_plugin: float
    psi_star: float
    posterior_means: np.ndarray
    m_zero: int


@dataclass(frozen=True)
class FitResult:
    report: EstimateReport
    em: EmResult
    grid: SupportGrid
    table: OutcomeTable
    matrix: LikelihoodMatrix
    inverse: np.ndarray  # stratum -> outcome row


def fit_report(
    obs: Sequence[Observation],
    scenario: Scenario,
    grid: SupportGrid | None = None,
    grid_spec: GridSpec | None = None,
    em_cfg: EmConfig | None = None,
) -> FitResult:
    """Full pipeline: collapse outcomes, build the likelihood matrix, run EM,
    and assemble every estimator plus per-stratum posterior means."""
    obs = list(obs)
    if not obs:
        raise EmptyData("need at least one stratum")
    scenario.validate(obs)
    if grid is None:
        grid = (grid_spec or GridSpec()).build(scenario, obs)
    elif type(grid.scenario) is not type(scenario) or grid.scenario != scenario:
        raise ValueError("grid was built for a different sampling scenario")

    table, inverse = collapse_observations(obs)
    try:
        matrix = build_outcome_matrix(table, grid)
    except ZeroLikelihoodRow as e:
        stratum = int(np.nonzero(inverse == e.row)[0][0])
        raise ZeroLikelihoodRow(
            stratum,
            f"stratum {stratum} with outcome (x={obs[stratum].x}, k={obs[stratum].k}) "
            "has zero probability under every grid point",
        ) from None
    em = fit_gmle(matrix, em_cfg)

    pm_rows = posterior_means(matrix, grid, em.weights)
    post = pm_rows[inverse]
    m_zero = sum(1 for o in obs if o.k == 0)
    plugin = gmle_plugin(grid, em.weights)

    observed_sum = sum(o.x / o.k for o in obs if o.k > 0)
    if m_zero:
        empty_idx = table.outcomes.index(Observation(0, 0))
        psi = (observed_sum + m_zero * float(pm_rows[empty_idx])) / len(obs)
    else:
        psi = observed_sum / len(obs)

    report = EstimateReport(
        naive=None if m_zero == len(obs) else naive_estimator(obs),
        extreme_collapse=extreme_collapse(obs),
        gmle_plugin=plugin,
        psi_star=psi,
        posterior_means=post,
        m_zero=m_zero,
    )
    return FitResult(report, em, grid, table, matrix, inverse)
