"""Monte Carlo experiment orchestration, outputs and the command line."""

from .config import (
    ConfigError,
    DetectionPolicy,
    ExperimentConfig,
    MeasurementSpec,
    NamedSolver,
    load_config,
    load_plan_file,
    parse_config,
)
from .experiment import (
    AggregateReport,
    ExperimentResult,
    TrialRecord,
    aggregate,
    calibrate_thresholds,
    expected_signal_energy,
    iter_trials,
    run_experiment,
    trial_inputs,
)
from .io import (
    emit_csv,
    emit_spectrum_plotdata,
    emit_summary_json,
    emit_timing_csv,
    load_measurement_dump,
    read_plotdata,
    read_trial_csv,
    save_measurement_dump,
)

__all__ = [
    "AggregateReport",
    "ConfigError",
    "DetectionPolicy",
    "ExperimentConfig",
    "ExperimentResult",
    "MeasurementSpec",
    "NamedSolver",
    "TrialRecord",
    "aggregate",
    "calibrate_thresholds",
    "emit_csv",
    "emit_spectrum_plotdata",
    "emit_summary_json",
    "emit_timing_csv",
    "expected_signal_energy",
    "iter_trials",
    "load_config",
    "load_measurement_dump",
    "load_plan_file",
    "parse_config",
    "read_plotdata",
    "read_trial_csv",
    "run_experiment",
    "save_measurement_dump",
    "trial_inputs",
]
