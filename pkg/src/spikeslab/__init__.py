"""Exact Bayesian inference for the sparse normal-means model with
spike-and-slab priors, plus a Monte Carlo experiment harness."""

from .dimension import (
    DimensionFamily,
    DimensionPrior,
    betabin_power_prior,
    binomial_prior,
    complexity_prior,
    custom_prior,
    geometric_prior,
    log_model_weight,
    poisson_prior,
)
from .estimators import LossSpec, dq_loss, hard_threshold, hard_threshold_oracle
from .harness import (
    ExperimentConfig,
    ResultTable,
    SignalSpec,
    emit_interval_data,
    generate_data,
    read_observations,
    run_contraction_check,
    run_dimension_check,
    run_shrinkage_demo,
    run_table,
)
from .logpoly import (
    LogPoly,
    leave_one_out_table,
    logsumexp_convolve,
    product_of_linear_factors,
    weighted_coeff_sum,
)
from .posterior import Posterior, PosteriorSummary, eb_binomial_weight, fit
from .slabs import (
    QuadratureError,
    SlabFamily,
    SlabPrior,
    exp_power_slab,
    gaussian_slab,
    laplace_slab,
    log_g,
    log_psi,
    log_psi_partial,
    posterior_shrinkage,
    second_moment_ratio,
    student_slab,
    zeta,
)

__version__ = "0.1.0"
