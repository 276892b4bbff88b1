"""Likelihood matrix construction and default grid tests."""

import math

import numpy as np
import pytest

from strata_gmle import (
    BinomialSampleSize,
    EmptyData,
    Observation,
    PRESETS,
    PoissonSampleSize,
    SupportGrid,
    ThetaPoint,
    ZeroLikelihoodRow,
    build_likelihood_matrix,
    component_density,
    default_grid,
    draw_dataset,
    product_grid,
)


def _poisson_grid(pairs):
    return SupportGrid(
        PoissonSampleSize(), tuple(ThetaPoint.from_rates(a, b) for a, b in pairs)
    )


def test_single_empty_observation_row():
    grid = _poisson_grid([(0.5, 0.5), (2.0, 1.0)])
    L = build_likelihood_matrix([Observation(0, 0)], grid)
    unscaled = L.L[0] * math.exp(L.row_scale[0])
    assert unscaled == pytest.approx([math.exp(-1.0), math.exp(-3.0)], rel=1e-14)


def test_rows_match_componentwise_reevaluation():
    rng = np.random.default_rng(42)
    scenario = PoissonSampleSize()
    grid = _poisson_grid([(a, b) for a in (0.2, 1.0, 2.5) for b in (0.4, 1.5)])
    obs = [
        Observation(int(x), int(k))
        for k in rng.poisson(1.5, 20)
        for x in [rng.binomial(k, 0.5)]
    ]
    L = build_likelihood_matrix(obs, grid)
    for i, y in enumerate(obs):
        unscaled = L.L[i] * math.exp(L.row_scale[i])
        direct = [component_density(y, p, scenario) for p in grid.points]
        assert unscaled == pytest.approx(direct, rel=1e-12)


def test_binomial_rows_match_componentwise_reevaluation():
    rng = np.random.default_rng(7)
    scenario = BinomialSampleSize(4)
    grid = default_grid(scenario, [Observation(0, 0)], dims=(6, 6))
    obs = [Observation(int(rng.integers(0, k + 1)), int(k)) for k in rng.integers(0, 5, 25)]
    L = build_likelihood_matrix(obs, grid)
    for i, y in enumerate(obs):
        unscaled = L.L[i] * math.exp(L.row_scale[i])
        direct = [component_density(y, p, scenario) for p in grid.points]
        assert unscaled == pytest.approx(direct, rel=1e-12)


def test_full_scale_matrix_is_finite():
    obs = draw_dataset(PRESETS["t1r1"], seed=3)
    grid = default_grid(PoissonSampleSize(), obs, dims=(40, 40))
    L = build_likelihood_matrix(obs, grid)
    assert L.L.shape == (1000, 1600)
    assert np.all(np.isfinite(L.L))
    assert np.all(L.L >= 0)
    assert np.all(L.L.max(axis=1) == 1.0)


def test_build_is_pure():
    obs = [Observation(1, 2), Observation(0, 0), Observation(2, 2)]
    grid = _poisson_grid([(0.5, 0.5), (1.0, 2.0)])
    a = build_likelihood_matrix(obs, grid)
    b = build_likelihood_matrix(obs, grid)
    assert np.array_equal(a.L, b.L)
    assert np.array_equal(a.row_scale, b.row_scale)


def test_zero_likelihood_row_raises_with_index():
    # a grid whose only points force x = k exactly cannot explain (1, 2)
    grid = SupportGrid(
        BinomialSampleSize(2), (ThetaPoint(1.0, 0.0), ThetaPoint(1.0, 1.0))
    )
    with pytest.raises(ZeroLikelihoodRow) as err:
        build_likelihood_matrix([Observation(2, 2), Observation(1, 2)], grid)
    assert err.value.row == 1


def test_empty_observations_rejected():
    grid = _poisson_grid([(0.5, 0.5)])
    with pytest.raises(EmptyData):
        build_likelihood_matrix([], grid)


# --- default grids -----------------------------------------------------------


def test_default_binomial_grid_shape_and_range():
    grid = default_grid(BinomialSampleSize(4), [Observation(1, 2)], dims=(40, 40))
    assert len(grid) == 1600
    assert grid.dims == (40, 40)
    assert grid.theta1s.min() == pytest.approx(0.025)
    assert grid.theta1s.max() == pytest.approx(0.975)
    assert grid.theta2s.min() == pytest.approx(0.025)
    assert grid.theta2s.max() == pytest.approx(0.975)


def test_binomial_unit_ranges_clamp_to_corner_offsets():
    grid = default_grid(
        BinomialSampleSize(1),
        [Observation(0, 0)],
        dims=(2, 2),
        t1min=0.0,
        t1max=1.0,
        t2min=0.0,
        t2max=1.0,
    )
    coords = sorted((p.theta1, p.theta2) for p in grid.points)
    assert coords == [(0.025, 0.025), (0.025, 0.975), (0.975, 0.025), (0.975, 0.975)]


def test_poisson_grid_from_data_maximum():
    obs = [Observation(0, 0), Observation(3, 6), Observation(1, 2)]
    grid = default_grid(PoissonSampleSize(), obs, dims=(3, 3))
    xi_values = sorted(set(grid.xi1s))
    assert xi_values == pytest.approx([0.01, 3.005, 6.0], abs=1e-12)
    assert sorted(set(grid.xi2s)) == pytest.approx([0.01, 3.005, 6.0], abs=1e-12)


def test_grid_points_are_distinct_and_off_origin():
    obs = [Observation(2, 4)]
    grid = default_grid(PoissonSampleSize(), obs, dims=(5, 5))
    assert len(set(grid.points)) == 25
    assert np.all(grid.xi1s + grid.xi2s > 0)


def test_empty_data_needs_explicit_range():
    with pytest.raises(EmptyData):
        default_grid(PoissonSampleSize(), [], dims=(4, 4))
    with pytest.raises(EmptyData):
        default_grid(BinomialSampleSize(2), [], dims=(4, 4))
    grid = default_grid(
        PoissonSampleSize(), [], dims=(4, 4), t1min=0.1, t1max=2.0, t2min=0.1, t2max=2.0
    )
    assert len(grid) == 16


def test_all_empty_poisson_data_needs_range():
    with pytest.raises(EmptyData):
        default_grid(PoissonSampleSize(), [Observation(0, 0)], dims=(4, 4))


def test_explicit_points_may_sit_on_the_boundary():
    grid = product_grid(BinomialSampleSize(1), [0.0, 1.0], [0.0, 1.0])
    assert len(grid) == 4
