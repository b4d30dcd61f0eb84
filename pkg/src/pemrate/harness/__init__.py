"""Configuration, rate experiments and the command line interface."""

from .._seeding import derive_seed
from .config import (
    ExperimentConfig,
    KeyValues,
    ModelSpec,
    experiment_config_from,
    load_config,
    parse_config_text,
)
from .experiment import (
    RateRow,
    RateSlope,
    RateTable,
    fit_rate_slope,
    run_cell,
    run_rate_experiment,
)
