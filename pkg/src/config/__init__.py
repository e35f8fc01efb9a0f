"""Configuration package."""

from .environment import get_log_level, get_max_workers, get_settings_file, load_environment_config
from .settings_manager import load_experiment_config, load_settings, save_settings

__all__ = [
    "get_log_level",
    "get_max_workers",
    "get_settings_file",
    "load_environment_config",
    "load_experiment_config",
    "load_settings",
    "save_settings",
]
