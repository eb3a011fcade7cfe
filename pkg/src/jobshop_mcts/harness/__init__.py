"""Experiment configuration, runner and figures."""

from .config import ALGORITHMS, ConfigError, ExperimentConfig, load_config, parse_config
from .render import render_gantt, render_tree_density
from .runner import (RESULT_COLUMNS, SUMMARY_COLUMNS, build_instance, evaluate_checks, run_cell,
                     run_experiment, summarize)

__all__ = [
    "ALGORITHMS", "ConfigError", "ExperimentConfig", "RESULT_COLUMNS", "SUMMARY_COLUMNS",
    "build_instance", "evaluate_checks", "load_config", "parse_config", "render_gantt",
    "render_tree_density", "run_cell", "run_experiment", "summarize",
]
