"""
Configuration management for hazefuse
"""
import os
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from hazefuse.core.exceptions import ValidationError


def default_dictionary_path() -> Path:
    """Bootstrap weather dictionary shipped with the package"""
    return Path(str(resources.files("hazefuse") / "data" / "bootstrap_dictionary.json"))


def _number(name: str, default: str, kind=float):
    raw = os.getenv(name, default)
    try:
        return kind(raw)
    except ValueError as e:
        raise ValidationError(f"{name}: expected a number, got '{raw}'") from e


def load_config(config_path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load configuration from .env file and environment

    Args:
        config_path: Optional path to config file

    Returns:
        Dictionary of configuration values
    """
    if config_path:
        load_dotenv(config_path)
    else:
        load_dotenv()

    log_file = os.getenv("HAZEFUSE_LOG_FILE")
    dictionary = os.getenv("HAZEFUSE_DICT")

    config = {
        # Logging
        "log_level": os.getenv("LOG_LEVEL", "INFO"),
        "log_file": Path(log_file) if log_file else None,

        # Weather engine
        "dictionary_path": Path(dictionary) if dictionary else default_dictionary_path(),
        "weather_eval_interval_s": _number("HAZEFUSE_EVAL_INTERVAL_S", "10"),
        "feature_window_s": _number("HAZEFUSE_FEATURE_WINDOW_S", "20"),
        "theta_dev": _number("HAZEFUSE_THETA_DEV", "3.0"),
        "theta_new": _number("HAZEFUSE_THETA_NEW", "6.0"),

        # Runner
        "broadcast_interval_s": _number("HAZEFUSE_BROADCAST_INTERVAL_S", "10"),
        "scan_workers": _number("HAZEFUSE_SCAN_WORKERS", "1", int),
        "output_dir": Path(os.getenv("HAZEFUSE_OUTPUT_DIR", "./output")),
    }

    if config["weather_eval_interval_s"] <= 0 or config["feature_window_s"] <= 0:
        raise ValidationError("evaluation interval and feature window must be > 0")
    if not 0 < config["theta_dev"] < config["theta_new"]:
        raise ValidationError("thresholds must satisfy 0 < theta_dev < theta_new")
    if config["scan_workers"] < 1:
        raise ValidationError("HAZEFUSE_SCAN_WORKERS must be >= 1")
    return config


def ensure_directories(config: Dict[str, Any]) -> None:
    """Create necessary directories if they don't exist"""
    for key in ["output_dir"]:
        path = config[key]
        path.mkdir(parents=True, exist_ok=True)
