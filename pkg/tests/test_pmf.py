"""Component pmf tests against exact-rational oracles."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strata_gmle import (
    BinomialSampleSize,
    Observation,
    PoissonSampleSize,
    ThetaPoint,
    binomial_pmf,
    component_density,
    poisson_pmf,
)


def oracle_binomial(x: int, n: int, p: float) -> float:
    """Exact rational evaluation of C(n,x) p^x (1-p)^(n-x)."""
    q = Fraction(p)
    return float(math.comb(n, x) * q**x * (1 - q) ** (n - x))


def oracle_poisson(k: int, lam: float) -> float:
    """Factorial-based evaluation of the Poisson mass."""
    if lam == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(-lam) * float(Fraction(lam) ** k / math.factorial(k))


def test_binomial_empty_product():
    assert binomial_pmf(0, 0, 0.3) == 1.0


def test_binomial_symmetric_fair():
    assert binomial_pmf(1, 2, 0.5) == 0.5


def test_binomial_against_factorial_oracle():
    got = binomial_pmf(3, 7, 0.42)
    assert got == pytest.approx(oracle_binomial(3, 7, 0.42), rel=1e-12)


@pytest.mark.parametrize(
    "x,n,p",
    [(0, 5, 0.0), (5, 5, 1.0), (2, 5, 0.0), (2, 5, 1.0), (0, 0, 1.0), (0, 0, 0.0)],
)
def test_binomial_boundary_probabilities(x, n, p):
    assert binomial_pmf(x, n, p) == oracle_binomial(x, n, p)


def test_binomial_large_n_log_path():
    got = binomial_pmf(250, 500, 0.4)
    # oracle stays exact: big rationals, one final float conversion
    assert got == pytest.approx(oracle_binomial(250, 500, 0.4), rel=1e-10)


def test_binomial_domain_errors():
    with pytest.raises(ValueError):
        binomial_pmf(3, 2, 0.5)
    with pytest.raises(ValueError):
        binomial_pmf(1, 2, -0.1)
    with pytest.raises(ValueError):
        binomial_pmf(1, 2, 1.1)
    with pytest.raises(ValueError):
        binomial_pmf(-1, 2, 0.5)


def test_poisson_degenerate_mass_at_zero():
    assert poisson_pmf(0, 0.0) == 1.0
    assert poisson_pmf(3, 0.0) == 0.0


def test_poisson_closed_form():
    assert poisson_pmf(0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-15)


def test_poisson_against_factorial_oracle():
    assert poisson_pmf(4, 1.7) == pytest.approx(oracle_poisson(4, 1.7), rel=1e-12)


def test_poisson_large_k_log_path():
    got = poisson_pmf(400, 350.0)
    expect = math.exp(400 * math.log(350.0) - 350.0 - math.lgamma(401))
    assert got == pytest.approx(expect, rel=1e-12)


def test_poisson_domain_errors():
    with pytest.raises(ValueError):
        poisson_pmf(-1, 1.0)
    with pytest.raises(ValueError):
        poisson_pmf(1, -0.5)


@given(
    x=st.integers(0, 40),
    extra=st.integers(0, 40),
    p=st.floats(0.0, 1.0),
)
def test_binomial_matches_oracle_everywhere(x, extra, p):
    n = x + extra
    assert binomial_pmf(x, n, p) == pytest.approx(oracle_binomial(x, n, p), rel=1e-12, abs=1e-300)


@given(k=st.integers(0, 60), lam=st.floats(0.0, 50.0))
def test_poisson_matches_oracle_everywhere(k, lam):
    got = poisson_pmf(k, lam)
    expect = oracle_poisson(k, lam)
    assert got == pytest.approx(expect, rel=1e-12, abs=1e-300)


# --- component densities -----------------------------------------------------


def test_poisson_component_both_zero():
    theta = ThetaPoint.from_rates(1.0, 1.0)
    got = component_density(Observation(0, 0), theta, PoissonSampleSize())
    assert got == pytest.approx(math.exp(-2.0), rel=1e-14)


def test_poisson_component_factorization_example():
    theta = ThetaPoint.from_rates(0.5, 0.5)
    y = Observation(1, 2)
    got = component_density(y, theta, PoissonSampleSize())
    assert got == pytest.approx(0.25 * math.exp(-1.0), rel=1e-13)
    # same mass via total-count-then-split factorization
    other = poisson_pmf(2, 1.0) * binomial_pmf(1, 2, 0.5)
    assert got == pytest.approx(other, rel=1e-12)


def test_binomial_component_single_trial():
    got = component_density(
        Observation(0, 0), ThetaPoint(0.5, 0.5), BinomialSampleSize(1)
    )
    assert got == 0.5


# rates at or above the default grid floor: below it, the float rounding of
# p = xi1/(xi1+xi2) near {0, 1} cannot carry the smaller rate to relative
# precision, so the identity is only meaningful on this regime
@given(
    xi1=st.floats(0.01, 30.0),
    xi2=st.floats(0.01, 30.0),
    x=st.integers(0, 25),
    extra=st.integers(0, 25),
)
def test_poisson_factorization_identity(xi1, xi2, x, extra):
    """Independent-rates product equals total-count times conditional split."""
    k = x + extra
    lam = xi1 + xi2
    p = xi1 / lam
    lhs = poisson_pmf(x, xi1) * poisson_pmf(k - x, xi2)
    rhs = poisson_pmf(k, lam) * binomial_pmf(x, k, p)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


def _truncation_for(theta, scenario, cover=1e-8):
    if isinstance(scenario, BinomialSampleSize):
        return scenario.kappa
    from scipy.stats import poisson as sp_poisson

    return int(sp_poisson.ppf(1 - cover, theta.theta1)) + 1


@pytest.mark.parametrize(
    "theta,scenario",
    [
        (ThetaPoint(0.3, 0.7), BinomialSampleSize(4)),
        (ThetaPoint(0.9, 0.1), BinomialSampleSize(6)),
        (ThetaPoint.from_rates(1.2, 0.8), PoissonSampleSize()),
        (ThetaPoint.from_rates(0.05, 3.0), PoissonSampleSize()),
    ],
)
def test_component_density_normalizes(theta, scenario):
    kmax = _truncation_for(theta, scenario)
    total = sum(
        component_density(Observation(x, k), theta, scenario)
        for k in range(kmax + 1)
        for x in range(k + 1)
    )
    assert 1.0 - 1e-6 <= total <= 1.0 + 1e-9


def test_component_density_propagates_domain_errors():
    with pytest.raises(ValueError):
        component_density(Observation(1, 3), ThetaPoint(0.5, 0.5), BinomialSampleSize(2))
