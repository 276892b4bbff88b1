"""EM fixed-point iteration for the grid mixing weights.

Each step reweights every grid point by its average posterior responsibility
across observations:

    w'_j = (1/n) sum_i  c_i * L[i, j] * w_j / (sum_j' L[i, j'] * w_j')

with c_i the row multiplicities.  The log-likelihood never decreases along
the iteration, and fixed points are stationary points of the likelihood
restricted to the support of w.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalUnderflow
from .types import LikelihoodMatrix, MixingWeights

# below this a weight is snapped to exact zero and the vector renormalized
_WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class EmConfig:
    """tol = 0 disables early stopping: all max_iter steps run and the final
    iterate is the estimate."""

    max_iter: int = 1000
    tol: float = 0.0
    init: MixingWeights | None = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")
        if self.tol < 0:
            raise ValueError(f"tol must be nonnegative, got {self.tol}")


@dataclass(frozen=True)
class EmResult:
    weights: MixingWeights
    loglik_trace: np.ndarray  # value at the init plus one entry per step
    iterations: int
    converged: bool


def _mixture(L: np.ndarray, w: np.ndarray) -> np.ndarray:
    mix = L @ w
    if np.any(mix <= 0.0):
        raise NumericalUnderflow(
            "mixture density is zero for some observation; "
            "the current weights give it no support"
        )
    return mix


def _step(L: np.ndarray, counts: np.ndarray, n: float, w: np.ndarray, mix: np.ndarray) -> np.ndarray:
    w_new = w * ((counts / mix) @ L) / n
    w_new[w_new < _WEIGHT_FLOOR] = 0.0
    total = w_new.sum()
    if total <= 0.0:
        raise NumericalUnderflow("all weights underflowed to zero")
    return w_new / total


def em_step(L: LikelihoodMatrix, w: MixingWeights) -> MixingWeights:
    """One EM update of the mixing weights."""
    counts = L.counts.astype(np.float64)
    mix = _mixture(L.L, w.w)
    return MixingWeights(_step(L.L, counts, counts.sum(), w.w, mix))


def log_likelihood(L: LikelihoodMatrix, w: MixingWeights | np.ndarray) -> float:
    """Mixture log-likelihood with the row scaling reinstated."""
    wv = w.w if isinstance(w, MixingWeights) else np.asarray(w, dtype=np.float64)
    mix = _mixture(L.L, wv)
    return float(L.counts @ (np.log(mix) + L.row_scale))


def fit_gmle(L: LikelihoodMatrix, cfg: EmConfig | None = None) -> EmResult:
    """Run the EM iteration from the configured init and return the final state."""
    cfg = cfg or EmConfig()
    n_points = L.L.shape[1]
    if cfg.init is None:
        w = np.full(n_points, 1.0 / n_points)
    else:
        if len(cfg.init) != n_points:
            raise ValueError(
                f"init has {len(cfg.init)} weights but the grid has {n_points} points"
            )
        w = cfg.init.w.copy()
    counts = L.counts.astype(np.float64)
    scale_total = float(L.counts @ L.row_scale)
    n = counts.sum()

    mix = _mixture(L.L, w)
    trace = [float(counts @ np.log(mix)) + scale_total]
    iterations = 0
    converged = cfg.tol == 0.0
    for t in range(1, cfg.max_iter + 1):
        w = _step(L.L, counts, n, w, mix)
        mix = _mixture(L.L, w)
        trace.append(float(counts @ np.log(mix)) + scale_total)
        iterations = t
        if cfg.tol > 0.0 and trace[-1] - trace[-2] < cfg.tol:
            converged = True
            break
    return EmResult(MixingWeights(w), np.asarray(trace), iterations, converged)
