from .analysis import (
    GapPoint,
    MonotonicityRow,
    ProfilePoint,
    SummaryRow,
    gap_curve,
    monotonicity,
    objective_means,
    performance_profile,
    rows_to_csv,
    summarize,
)
from .experiment import ConfigError, ExperimentConfig, load_config, parse_config, run_experiment, run_one
from .records import RecordAppender, RunRecord, read_records, write_records

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "GapPoint",
    "MonotonicityRow",
    "ProfilePoint",
    "RecordAppender",
    "RunRecord",
    "SummaryRow",
    "gap_curve",
    "load_config",
    "monotonicity",
    "objective_means",
    "parse_config",
    "performance_profile",
    "read_records",
    "rows_to_csv",
    "run_experiment",
    "run_one",
    "summarize",
    "write_records",
]
