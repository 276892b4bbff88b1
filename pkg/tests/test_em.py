"""EM iteration: update formula, monotonicity, fixed points, equivariance."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strata_gmle import (
    EmConfig,
    LikelihoodMatrix,
    MixingWeights,
    NumericalUnderflow,
    Observation,
    PoissonSampleSize,
    SupportGrid,
    ThetaPoint,
    build_likelihood_matrix,
    em_step,
    fit_gmle,
    log_likelihood,
)


def _matrix(L, counts=None):
    L = np.asarray(L, dtype=float)
    return LikelihoodMatrix(
        L,
        np.zeros(L.shape[0]),
        np.ones(L.shape[0], dtype=np.int64) if counts is None else np.asarray(counts),
    )


def _random_matrix(rng, n, j, counts=False):
    L = rng.uniform(0.05, 1.0, size=(n, j))
    c = rng.integers(1, 6, size=n) if counts else None
    return _matrix(L, c)


def test_step_matches_update_formula():
    rng = np.random.default_rng(11)
    L = _random_matrix(rng, 3, 4)
    w = MixingWeights.uniform(4)
    got = em_step(L, w).w
    mix = L.L @ w.w
    expect = w.w * ((1.0 / mix) @ L.L) / 3
    assert got == pytest.approx(expect, rel=1e-14)


def test_single_point_grid_is_absorbing():
    L = _matrix([[0.3], [0.8]])
    got = em_step(L, MixingWeights(np.array([1.0])))
    assert got.w == pytest.approx([1.0])


def test_zero_density_component_is_killed():
    L = _matrix([[2.0, 0.0]])
    got = em_step(L, MixingWeights(np.array([0.5, 0.5])))
    assert got.w == pytest.approx([1.0, 0.0], abs=0.0)


def test_identical_columns_keep_uniform_weights():
    L = _matrix(np.tile([[0.4], [0.9], [0.1]], (1, 5)))
    w = MixingWeights.uniform(5)
    got = em_step(L, w)
    assert got.w == pytest.approx(w.w, abs=1e-15)


def test_counts_reproduce_expanded_rows():
    rng = np.random.default_rng(5)
    base = rng.uniform(0.1, 1.0, size=(3, 4))
    counts = np.array([3, 1, 2])
    expanded = _matrix(np.repeat(base, counts, axis=0))
    collapsed = _matrix(base, counts)
    w = MixingWeights(rng.dirichlet(np.ones(4)))
    assert em_step(collapsed, w).w == pytest.approx(em_step(expanded, w).w, rel=1e-14)
    assert log_likelihood(collapsed, w) == pytest.approx(
        log_likelihood(expanded, w), rel=1e-14
    )


def test_log_likelihood_closed_forms():
    assert log_likelihood(_matrix([[1.0]]), MixingWeights(np.array([1.0]))) == 0.0
    got = log_likelihood(_matrix([[0.5], [0.25]]), MixingWeights(np.array([1.0])))
    assert got == pytest.approx(np.log(0.5) + np.log(0.25), rel=1e-15)


def test_log_likelihood_reinstates_row_scaling():
    L = LikelihoodMatrix(
        np.array([[1.0, 0.5]]), np.array([-3.0]), np.array([2], dtype=np.int64)
    )
    w = MixingWeights(np.array([0.5, 0.5]))
    assert log_likelihood(L, w) == pytest.approx(2 * (np.log(0.75) - 3.0), rel=1e-14)


def test_underflow_raises():
    L = _matrix([[1.0, 0.0]])
    with pytest.raises(NumericalUnderflow):
        em_step(L, MixingWeights(np.array([0.0, 1.0])))
    with pytest.raises(NumericalUnderflow):
        log_likelihood(L, MixingWeights(np.array([0.0, 1.0])))


def test_fit_recovers_a_single_support_point():
    # all strata share one latent point; the other grid point is far away
    rng = np.random.default_rng(0)
    k = rng.poisson(1.0, 2000)
    x = rng.binomial(k, 0.5)
    obs = [Observation(int(a), int(b)) for a, b in zip(x, k)]
    grid = SupportGrid(
        PoissonSampleSize(),
        (ThetaPoint.from_rates(0.5, 0.5), ThetaPoint.from_rates(3.0, 3.0)),
    )
    L = build_likelihood_matrix(obs, grid)
    res = fit_gmle(L, EmConfig(max_iter=1000))
    assert res.weights.w[0] >= 0.99


def test_symmetric_likelihood_stays_uniform():
    L = _matrix(np.tile([[0.4], [0.9]], (1, 3)))
    res = fit_gmle(L, EmConfig(max_iter=50))
    assert res.weights.w == pytest.approx(np.full(3, 1 / 3), abs=1e-14)


def test_trace_starts_at_init_and_never_decreases():
    rng = np.random.default_rng(3)
    L = _random_matrix(rng, 12, 7, counts=True)
    res = fit_gmle(L, EmConfig(max_iter=300))
    assert res.loglik_trace.shape == (301,)
    assert res.loglik_trace[0] == pytest.approx(
        log_likelihood(L, MixingWeights.uniform(7)), rel=1e-15
    )
    assert np.all(np.diff(res.loglik_trace) >= -1e-9)
    assert res.loglik_trace[-1] >= res.loglik_trace[0]
    assert res.iterations == 300
    assert res.converged  # tol = 0 runs the full budget by design


def test_tol_stopping_flags_convergence():
    rng = np.random.default_rng(4)
    L = _random_matrix(rng, 6, 3)
    res = fit_gmle(L, EmConfig(max_iter=100000, tol=1e-10))
    assert res.converged
    assert res.iterations < 100000
    gains = np.diff(res.loglik_trace)
    assert gains[-1] < 1e-10
    # fixed-point stability: one more step moves no coordinate much
    moved = em_step(L, res.weights).w - res.weights.w
    assert np.max(np.abs(moved)) <= 1e-6


def test_unconverged_when_budget_too_small():
    rng = np.random.default_rng(8)
    L = _random_matrix(rng, 20, 6)
    res = fit_gmle(L, EmConfig(max_iter=2, tol=1e-14))
    assert not res.converged
    assert res.iterations == 2


def test_explicit_init_is_respected():
    L = _matrix([[0.5, 0.1], [0.1, 0.5]])
    init = MixingWeights(np.array([0.9, 0.1]))
    res = fit_gmle(L, EmConfig(max_iter=1, init=init))
    expect = em_step(L, init).w
    assert res.weights.w == pytest.approx(expect, rel=1e-15)
    with pytest.raises(ValueError):
        fit_gmle(L, EmConfig(init=MixingWeights(np.array([1.0]))))


def test_permutation_equivariance():
    rng = np.random.default_rng(9)
    L = _random_matrix(rng, 10, 6, counts=True)
    perm = rng.permutation(6)
    L_perm = LikelihoodMatrix(L.L[:, perm], L.row_scale, L.counts)
    res = fit_gmle(L, EmConfig(max_iter=200))
    res_perm = fit_gmle(L_perm, EmConfig(max_iter=200))
    assert res_perm.weights.w == pytest.approx(res.weights.w[perm], abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_step_preserves_simplex_and_monotonicity(seed):
    rng = np.random.default_rng(seed)
    n, j = int(rng.integers(1, 9)), int(rng.integers(1, 7))
    L = _random_matrix(rng, n, j, counts=True)
    w = MixingWeights(rng.dirichlet(np.ones(j)))
    for _ in range(3):
        before = log_likelihood(L, w)
        w = em_step(L, w)
        assert np.all(w.w >= 0)
        assert abs(w.w.sum() - 1.0) <= 1e-12
        assert log_likelihood(L, w) >= before - 1e-9


def test_config_validation():
    with pytest.raises(ValueError):
        EmConfig(max_iter=0)
    with pytest.raises(ValueError):
        EmConfig(tol=-1.0)
