"""Batch command-line front end."""

from .experiments import run
from .main import handle_experiment_error, main
from .report_writer import emit_plot_table

__all__ = ["emit_plot_table", "handle_experiment_error", "main", "run"]
