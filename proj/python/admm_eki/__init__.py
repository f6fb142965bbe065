"""Python bindings for the ADMM-EKI solver and benchmarks."""

from ._core import (
    ConfigError,
    DimensionError,
    DivergenceError,
    annealing_beta,
    bicycle_step,
    compare,
    default_config,
    derive_seed,
    disk_penalty,
    dual_update,
    race_environment,
    rastrigin_forward,
    rastrigin_misfit,
    run,
    run_rastrigin_demo,
    slack_update,
    validate_config,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "DivergenceError",
    "annealing_beta",
    "bicycle_step",
    "compare",
    "default_config",
    "derive_seed",
    "disk_penalty",
    "dual_update",
    "race_environment",
    "rastrigin_forward",
    "rastrigin_misfit",
    "run",
    "run_rastrigin_demo",
    "slack_update",
    "validate_config",
]
