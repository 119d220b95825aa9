"""Experiment harness: configuration, table runners, validation and CLI."""
from .config import ExperimentConfig, load_config
from .runner import Table, run_protocol, run_simulate, run_sweep_temperature
from .validate import run_validate

__all__ = ["ExperimentConfig", "load_config", "Table", "run_simulate", "run_sweep_temperature", "run_protocol", "run_validate"]
