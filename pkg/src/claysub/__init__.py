"""Truncated bivariate stable-Clayton subordinators.

Simulation of the jump record, small-jump truncation into an observable
compound-Poisson dataset, three estimation methods (two-step, joint-jumps
MLE, full MLE), sandwich covariance of the two-step estimator, and a Monte
Carlo study harness with a command-line front end.
"""

from .estimate import (
    Diagnostics,
    EstimateResult,
    Method,
    fit_dependence,
    full_mle,
    joint_only_mle,
    marginal_mle,
    two_step_ifm,
)
from .godambe import (
    GodambeReport,
    MonteCarlo,
    PairMoments,
    Quadrature,
    build_D,
    build_M,
    estimate_abm,
    godambe_report,
    invert3,
    limit_V,
    limit_V_adjusted,
    margin_overlap_adjustment,
    pair_moments,
    sandwich,
)
from .model import (
    CommonParameterError,
    IntensitySet,
    LambdaJointDerivs,
    ModelParams,
    TruncationConfig,
    clayton,
    intensities,
    joint_jump_density,
    joint_jump_survival,
    lambda_joint_derivs,
    marginal_tail,
    marginal_tail_inverse,
    t_statistic,
    t_statistic_mean,
    truncated_copula,
)
from .observe import (
    TruncatedDataset,
    count_moments,
    sample_truncated_dataset,
    simulate_counts,
    truncate,
)
from .simulate import (
    JumpStream,
    SimulationConfig,
    conditional_level_cdf,
    conditional_level_inverse,
    sample_joint_jump_pairs,
    sample_single_jumps,
    simulate_path,
)
from .study import (
    HistogramReport,
    ParameterHistogram,
    StudyConfig,
    StudyResult,
    StudyRow,
    figure1_preset,
    histogram_report,
    run_study,
    table1_preset,
)

__version__ = "0.1.0"

__all__ = [
    "CommonParameterError",
    "Diagnostics",
    "EstimateResult",
    "GodambeReport",
    "HistogramReport",
    "IntensitySet",
    "JumpStream",
    "LambdaJointDerivs",
    "Method",
    "ModelParams",
    "MonteCarlo",
    "PairMoments",
    "ParameterHistogram",
    "Quadrature",
    "SimulationConfig",
    "StudyConfig",
    "StudyResult",
    "StudyRow",
    "TruncatedDataset",
    "TruncationConfig",
    "build_D",
    "build_M",
    "clayton",
    "conditional_level_cdf",
    "conditional_level_inverse",
    "count_moments",
    "estimate_abm",
    "figure1_preset",
    "fit_dependence",
    "full_mle",
    "godambe_report",
    "histogram_report",
    "intensities",
    "invert3",
    "joint_jump_density",
    "joint_jump_survival",
    "joint_only_mle",
    "lambda_joint_derivs",
    "limit_V",
    "limit_V_adjusted",
    "margin_overlap_adjustment",
    "marginal_mle",
    "marginal_tail",
    "marginal_tail_inverse",
    "pair_moments",
    "run_study",
    "sample_joint_jump_pairs",
    "sample_single_jumps",
    "sample_truncated_dataset",
    "sandwich",
    "simulate_counts",
    "simulate_path",
    "t_statistic",
    "t_statistic_mean",
    "table1_preset",
    "truncate",
    "truncated_copula",
    "two_step_ifm",
    "__version__",
]
