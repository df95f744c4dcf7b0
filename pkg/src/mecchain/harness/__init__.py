"""Experiment configs, seeded multi-run orchestration and reports."""
from .experiment import (SWEEP_AXES, ExperimentSpec, apply_axis, derive_seed, dump_config,
                         load_config, spec_from_dict)
from .runner import SCHEMA_VERSION, SERIES_COLUMNS, aggregate_columns, execute_run, read_series, run_experiment
from .summary import SummaryError, summarize, write_report

__all__ = [
    "ExperimentSpec", "SCHEMA_VERSION", "SERIES_COLUMNS", "SWEEP_AXES", "SummaryError", "aggregate_columns",
    "apply_axis", "derive_seed", "dump_config", "execute_run", "load_config", "read_series",
    "run_experiment", "spec_from_dict", "summarize", "write_report",
]
