"""Mean estimation over strata with many empty cells, via a grid mixture fit.

The library fits a discrete mixing distribution for the latent per-stratum
parameters (sampling intensity, success probability) by EM on a product grid,
turns it into plug-in and posterior-mean estimators, bounds the target with
likelihood-ratio confidence sets, and extends to weighted nonnegative
outcomes through survival-threshold integration.
"""

from .bounds import ChiSquare, CiConfig, LogPower, ci_bounds, deviance, threshold
from .em import EmConfig, EmResult, em_step, fit_gmle, log_likelihood
from .errors import (
    AllStrataEmpty,
    EmptyData,
    EstimationError,
    InfeasibleConstraint,
    InputError,
    NumericalUnderflow,
    ZeroLikelihoodRow,
)
from .estimators import (
    EstimateReport,
    FitResult,
    agreement_check,
    extreme_collapse,
    fit_report,
    gmle_plugin,
    naive_estimator,
    posterior_mean,
    posterior_means,
    psi_star_estimator,
)
from .likelihood import (
    build_likelihood_matrix,
    build_outcome_matrix,
    default_grid,
    product_grid,
)
from .pmf import binomial_pmf, component_density, density_row, poisson_pmf
from .simulate import (
    ESTIMATOR_NAMES,
    PRESETS,
    DesignGroup,
    EstimatorStats,
    PointMass,
    SimSummary,
    StrataDesign,
    Uniform,
    draw_dataset,
    run_replications,
    thin_dataset,
)
from .thresholds import (
    GeneralStratum,
    ThresholdCurve,
    ThresholdPlan,
    binary_reduce,
    build_threshold_plan,
    general_estimate,
    threshold_curve,
)
from .types import (
    BinomialSampleSize,
    GridSpec,
    LikelihoodMatrix,
    MixingWeights,
    Observation,
    OutcomeTable,
    PoissonSampleSize,
    Scenario,
    SupportGrid,
    ThetaPoint,
    collapse_observations,
)

__version__ = "0.1.0"
