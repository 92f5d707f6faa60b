from .bounds import (
    BoundConstants,
    BoundReport,
    InsufficientDataError,
    check_bounds,
    derive_constants,
    fit_power_law,
    fit_rate,
)
from .experiment import (
    ExperimentConfig,
    PathData,
    RunSummary,
    geometric_checkpoints,
    run_experiment,
    simulate,
    simulate_paths,
    summarize,
)
from .probe import ProbeRow, near_threshold_probe
