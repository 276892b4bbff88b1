"""Likelihood-ratio confidence bounds for the mean success probability.

The feasible set is the simplex of grid weights whose outcome deviance stays
under a threshold (chi-square quantile for finitely many outcomes, a
log-power rule for the countable case).  The interval is the range of the
plug-in estimate over that convex set, solved as a pair of linear-objective
convex programs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cvxpy as cp
import numpy as np
from scipy.stats import chi2

from .em import EmConfig, fit_gmle
from .errors import InfeasibleConstraint, NumericalUnderflow
from .estimators import gmle_plugin
from .likelihood import build_outcome_matrix
from .types import MixingWeights, OutcomeTable, SupportGrid


@dataclass(frozen=True)
class ChiSquare:
    """Threshold at the chi-square quantile with (outcomes - 1) degrees of freedom."""


@dataclass(frozen=True)
class LogPower:
    """Threshold at log(n)^(1 + alpha_exp), for countably many outcomes."""

    alpha_exp: float

    def __post_init__(self):
        if self.alpha_exp <= 0:
            raise ValueError(f"alpha_exp must be positive, got {self.alpha_exp}")


ConstraintMode = ChiSquare | LogPower


@dataclass(frozen=True)
class CiConfig:
    alpha: float = 0.05
    objective_tol: float = 1e-5
    mode: ConstraintMode = ChiSquare()

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.objective_tol <= 0:
            raise ValueError(f"objective_tol must be positive, got {self.objective_tol}")


def deviance(table: OutcomeTable, grid: SupportGrid, w: MixingWeights) -> float:
    """2 * sum_y n_y log(phat_y / q_y(w)); convex in w, zero at a perfect fit."""
    L = build_outcome_matrix(table, grid)
    mix = L.L @ w.w
    if np.any(mix <= 0.0):
        raise NumericalUnderflow("some observed outcome has zero mixture probability")
    log_q = np.log(mix) + L.row_scale
    log_phat = np.log(table.frequencies)
    return float(2.0 * (table.counts @ (log_phat - log_q)))


def threshold(cfg: CiConfig, table: OutcomeTable) -> float:
    """Deviance cap implied by the configured constraint mode."""
    if isinstance(cfg.mode, ChiSquare):
        df = len(table.outcomes) - 1
        if df == 0:
            return 0.0
        return float(chi2.ppf(1.0 - cfg.alpha, df))
    return float(math.log(table.n) ** (1.0 + cfg.mode.alpha_exp))


def _solve(objective, constraints) -> float:
    problem = cp.Problem(objective, constraints)
    inaccurate = None
    for solver in (cp.CLARABEL, cp.SCS):
        try:
            problem.solve(solver=solver)
        except cp.SolverError:
            continue
        if problem.status == cp.OPTIMAL:
            return float(problem.value)
        if problem.status == cp.OPTIMAL_INACCURATE and inaccurate is None:
            inaccurate = float(problem.value)
    if inaccurate is not None:
        return inaccurate
    raise RuntimeError(f"bound optimization failed (last status: {problem.status})")


def ci_bounds(
    table: OutcomeTable,
    grid: SupportGrid,
    cfg: CiConfig | None = None,
    em_cfg: EmConfig | None = None,
    gmle: MixingWeights | None = None,
) -> tuple[float, float]:
    """(min, max) of the plug-in estimate over the deviance-feasible simplex.

    The likelihood maximizer is fitted first (or passed in) both to report
    feasibility and to guarantee the set is nonempty; if even it violates the
    threshold, the grid cannot explain the data and InfeasibleConstraint is
    raised.
    """
    cfg = cfg or CiConfig()
    L = build_outcome_matrix(table, grid)
    if gmle is None:
        gmle = fit_gmle(L, em_cfg).weights
    cap = threshold(cfg, table)
    dev_at_gmle = deviance(table, grid, gmle)
    if dev_at_gmle > cap:
        raise InfeasibleConstraint(
            f"likelihood maximizer has deviance {dev_at_gmle:.6g} above the "
            f"threshold {cap:.6g}; the grid cannot explain the data"
        )

    plugin = gmle_plugin(grid, gmle)
    if len(grid) == 1:
        return plugin, plugin

    ny = table.counts.astype(np.float64)
    # deviance(w) = offset - 2 * sum_y n_y log((L w)_y), offset folding in
    # the empirical term and the row scaling
    offset = float(2.0 * (ny @ (np.log(table.frequencies) - L.row_scale)))
    w = cp.Variable(len(grid), nonneg=True)
    constraints = [
        cp.sum(w) == 1,
        offset - 2.0 * cp.sum(cp.multiply(ny, cp.log(L.L @ w))) <= cap,
    ]
    target = grid.theta2s @ w
    lower = _solve(cp.Minimize(target), constraints)
    upper = _solve(cp.Maximize(target), constraints)
    return min(lower, upper), max(lower, upper)
