"""Quadratic prediction error method with ARMA specialization and rate diagnostics."""

from .arma import (
    ArmaModel,
    ArmaParams,
    Trajectory,
    check_stability,
    predict_gradients,
    predict_hessians,
    predict_sequence,
    residuals,
    simulate,
    simulate_from_noise,
)
from .estimator import (
    ArmaPEM,
    FitConfig,
    FitResult,
    closed_form_ar1,
    fit,
    loss,
    prediction_error_mc,
)
from .exceptions import ConfigError, DomainError, EstimationError, ResourceError
from .noise import NoiseSpec, sample_noise, sub_gaussian_sigma
from .param_space import (
    ParameterClass,
    build_epsilon_net,
    covering_number_bound,
    function_class_covering_bound,
    project,
)
from ._seeding import derive_seed

__version__ = "0.1.0"
