"""Computable versions of the quantities behind the prediction-error rate."""

from .constants import (
    LEADING_CONSTANT,
    BurnInReport,
    ConstantSet,
    burn_in_times,
    parameter_error_bound,
    theorem1_bound,
)
from .dependency import (
    DependencyGrowth,
    DependencyMatrix,
    dependency_matrix_markov,
    fit_dependency_growth,
    stationary_distribution,
)
from .information import (
    InfoEstimate,
    IsometryRates,
    SmoothnessConstants,
    empirical_info,
    expected_info_mc,
    fisher_info,
    isometry_event_rates,
    predicted_isometry_bounds,
    quad_ident_constant_mc,
    smoothness_constants_mc,
)
from .offsets import (
    TaylorCheck,
    basic_inequality_holds,
    linearized_offset,
    martingale_offset,
    mean_squared_gap,
    prediction_gap,
    taylor_decomposition_check,
)

__all__ = [
    "LEADING_CONSTANT", "BurnInReport", "ConstantSet", "burn_in_times",
    "parameter_error_bound", "theorem1_bound", "DependencyGrowth", "DependencyMatrix",
    "dependency_matrix_markov", "fit_dependency_growth", "stationary_distribution",
    "InfoEstimate", "IsometryRates", "SmoothnessConstants", "empirical_info",
    "expected_info_mc", "fisher_info", "isometry_event_rates", "predicted_isometry_bounds",
    "quad_ident_constant_mc", "smoothness_constants_mc", "TaylorCheck",
    "basic_inequality_holds", "linearized_offset", "martingale_offset", "mean_squared_gap",
    "prediction_gap", "taylor_decomposition_check",
]
