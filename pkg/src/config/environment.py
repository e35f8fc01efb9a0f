"""Environment configuration module for centralized environment variable management."""

import logging
import os
from typing import Optional

logger = logging.getLogger("config")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def get_max_workers() -> Optional[int]:
    """Optional cap on worker threads from EVENINIT_MAX_WORKERS; None means no cap."""
    raw = os.getenv("EVENINIT_MAX_WORKERS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        logger.warning("EVENINIT_MAX_WORKERS is not an integer (%s), ignoring it", raw)
        return None
    if value < 1:
        logger.warning("EVENINIT_MAX_WORKERS must be at least 1 (got %d), ignoring it", value)
        return None
    return value


def get_log_level() -> str:
    """Log level from EVENINIT_LOG_LEVEL, INFO when unset or unknown."""
    raw = os.getenv("EVENINIT_LOG_LEVEL", "INFO").strip().upper()
    if raw not in LOG_LEVELS:
        logger.warning("Unknown EVENINIT_LOG_LEVEL %s, using INFO", raw)
        return "INFO"
    return raw


def get_settings_file() -> str:
    return os.getenv("EVENINIT_SETTINGS_FILE", "settings.json")


def load_environment_config() -> dict[str, object]:
    """Snapshot of every lab-related environment value."""
    config = {
        "max_workers": get_max_workers(),
        "log_level": get_log_level(),
        "settings_file": get_settings_file(),
    }
    logger.debug("Environment config: %s", config)
    return config
