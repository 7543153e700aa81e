"""Superset model probability for linear-regression variable selection.

Quantifies how much posterior mass a normal linear model (heavy-tailed
mixing prior over coefficient scale) places on strict supersets of the
covariate subset favored by a flexible local-constant model scored with
cross-validated empirical-Bayes marginal likelihoods.
"""

from .data import (
    Dataset,
    FoldPlan,
    LocalGroup,
    StandardizedFold,
    SubsetMask,
    all_subsets,
    group_distinct,
    make_folds,
    precision_split,
    standardize_fold,
)
from .errors import (
    ConfigError,
    DataError,
    NumericalError,
    SupersetError,
)
from .linear import (
    H1ModelScore,
    ModelPosterior,
    h1_posterior,
    normalize_posterior,
    r_squared,
    score_subset,
)
from .local import (
    FoldFit,
    LocalMLResult,
    LocalPrior,
    cubic_coefficients,
    fit_fold,
    fold_log_ml_per_obs,
    h0_log_marginal,
    h0_posterior,
    local_prior,
    log_cond_ml,
    maximize_local_ml,
)
from .numerics import CubicRoots, log_g_integral, log_sum_exp, solve_cubic
from .pipeline import (
    AnalysisResult,
    RunConfig,
    analyze,
    build_report,
    local_posterior,
    split_run,
    sweep_folds,
)
from .superset import (
    SupersetReport,
    is_strict_superset,
    is_superset,
    superset_probability,
)
from .synth import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "ConfigError",
    "CubicRoots",
    "DataError",
    "Dataset",
    "FoldFit",
    "FoldPlan",
    "H1ModelScore",
    "LocalGroup",
    "LocalMLResult",
    "LocalPrior",
    "ModelPosterior",
    "NumericalError",
    "RunConfig",
    "StandardizedFold",
    "SubsetMask",
    "SupersetError",
    "SupersetReport",
    "SynthConfig",
    "all_subsets",
    "analyze",
    "build_report",
    "cubic_coefficients",
    "fit_fold",
    "fold_log_ml_per_obs",
    "generate",
    "group_distinct",
    "h0_log_marginal",
    "h0_posterior",
    "h1_posterior",
    "is_strict_superset",
    "is_superset",
    "local_posterior",
    "local_prior",
    "log_cond_ml",
    "log_g_integral",
    "log_sum_exp",
    "make_folds",
    "maximize_local_ml",
    "normalize_posterior",
    "precision_split",
    "r_squared",
    "score_subset",
    "solve_cubic",
    "split_run",
    "standardize_fold",
    "superset_probability",
    "sweep_folds",
    "__version__",
]
