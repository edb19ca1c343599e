"""Reproducible, configuration-driven recommender-system experiments."""
from .config import ExperimentConfig, load_config, parse_config, render_config
from .dataset import Dataset, load_dataset
from .experiment import ExperimentResult, run_experiment
from .reporting import write_reports

__version__ = "0.1.0"

__all__ = ["Dataset", "ExperimentConfig", "ExperimentResult", "load_config", "load_dataset",
           "parse_config", "render_config", "run_experiment", "write_reports", "__version__"]
