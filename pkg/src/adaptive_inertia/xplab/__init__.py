"""Experiment harness: configs, scenario matrix, tables and the CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .runner import MatrixResult, RunRecord, run_matrix
from .tables import emit_comparison_table, emit_inertia_table, emit_summary

__all__ = [
    "ConfigError", "ExperimentConfig", "MatrixResult", "RunRecord", "emit_comparison_table",
    "emit_inertia_table", "emit_summary", "load_config", "parse_config", "run_matrix",
]
