"""Settings management: lab defaults in settings.json and experiment config resolution."""

import copy
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Mapping, Optional

from pydantic import ValidationError as PydanticValidationError

from src.exceptions import ConfigurationError
from src.models.schemas import ExperimentConfig, LabSettings

from .environment import get_settings_file

logger = logging.getLogger("settings_manager")


def get_settings_file_path() -> Path:
    """Get the path of the settings file (EVENINIT_SETTINGS_FILE or settings.json)."""
    return Path(get_settings_file())


def load_settings(path: Optional[Path] = None) -> LabSettings:
    """Load lab defaults; a missing or malformed file falls back to model defaults."""
    settings_path = path or get_settings_file_path()
    if not settings_path.exists():
        logger.info("Settings file %s not found, using defaults", settings_path)
        return LabSettings()
    try:
        with open(settings_path, "r", encoding="utf-8") as f:
            data = json.load(f)
        if isinstance(data, dict):
            return LabSettings(**data)
        logger.warning("Invalid settings format in %s, using defaults", settings_path)
    except (json.JSONDecodeError, PydanticValidationError) as e:
        logger.warning("Failed to load settings from %s: %s", settings_path, e)
    return LabSettings()


def save_settings(settings: LabSettings, path: Optional[Path] = None) -> bool:
    """Write settings back with a fresh last_updated timestamp."""
    try:
        settings_path = path or get_settings_file_path()
        settings.last_updated = datetime.now().isoformat()
        settings_path.parent.mkdir(parents=True, exist_ok=True)
        with open(settings_path, "w", encoding="utf-8") as f:
            json.dump(settings.model_dump(), f, indent=2, ensure_ascii=False)
        logger.info("Settings saved to %s", settings_path)
        return True
    except OSError as e:
        logger.error("Failed to save settings: %s", e)
        return False


def settings_defaults(settings: LabSettings) -> dict[str, Any]:
    """Config fragment contributed by the lab defaults."""
    return {
        "trials": settings.default_trials,
        "tolerances": {
            "z": settings.wilson_z,
            "independence_threshold": settings.independence_threshold,
            "output_clamp_bound": settings.output_clamp_bound,
            "grad_factor": settings.grad_factor,
            "eig_factor": settings.eig_factor,
            "descent_directions": settings.descent_directions,
            "hessian_budget": settings.hessian_budget,
            "enumeration_cap": settings.enumeration_cap,
            "oracle_gap": settings.oracle_gap,
            "slope_tolerance": settings.slope_tolerance,
        },
    }


def merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    """Recursive dict merge; None values in ``override`` leave ``base`` untouched."""
    merged = copy.deepcopy(dict(base))
    for key, value in override.items():
        if value is None:
            continue
        if isinstance(value, Mapping):
            base_value = merged.get(key)
            merged[key] = merge(base_value if isinstance(base_value, Mapping) else {}, value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def read_config_file(path: Path) -> dict[str, Any]:
    """Parse a config file; a previously written report contributes its config echo."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ConfigurationError("Config file not found", str(path)) from e
    except json.JSONDecodeError as e:
        raise ConfigurationError("Config file is not valid JSON", f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError("Config file must hold a JSON object", str(path))
    if "rows" in data and isinstance(data.get("config"), dict):
        logger.info("Using the config echo of report %s", path)
        return data["config"]
    return data


def _field_path(location: tuple) -> str:
    return ".".join(str(part) for part in location)


def build_config(file_data: Optional[Mapping[str, Any]], overrides: Mapping[str, Any],
                 settings: Optional[LabSettings] = None) -> ExperimentConfig:
    """Resolve flag > file > lab defaults into one validated ExperimentConfig."""
    resolved = merge(settings_defaults(settings or load_settings()), file_data or {})
    resolved = merge(resolved, overrides)
    try:
        return ExperimentConfig(**resolved)
    except PydanticValidationError as e:
        first = e.errors()[0]
        raise ConfigurationError("Invalid experiment config", first["msg"],
                                 field_path=_field_path(first["loc"])) from e


def load_experiment_config(path: Optional[Path], overrides: Mapping[str, Any],
                           settings: Optional[LabSettings] = None) -> ExperimentConfig:
    file_data = read_config_file(path) if path is not None else None
    return build_config(file_data, overrides, settings)
