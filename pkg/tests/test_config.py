"""
Tests for configuration loading and logging setup
"""
import logging
from pathlib import Path

import pytest

from hazefuse.core.exceptions import ValidationError
from hazefuse.utils.config import default_dictionary_path, ensure_directories, load_config
from hazefuse.utils.logging_setup import setup_logging


@pytest.fixture
def empty_env_file(tmp_path):
    path = tmp_path / "empty.env"
    path.write_text("")
    return path


def test_defaults(clean_env, empty_env_file, tmp_path):
    config = load_config(empty_env_file)
    assert config["log_level"] == "INFO"
    assert config["log_file"] is None
    assert config["dictionary_path"] == default_dictionary_path()
    assert config["weather_eval_interval_s"] == 10.0
    assert config["feature_window_s"] == 20.0
    assert (config["theta_dev"], config["theta_new"]) == (3.0, 6.0)
    assert config["scan_workers"] == 1
    assert config["output_dir"] == tmp_path / "output"


def test_bundled_dictionary_exists():
    assert default_dictionary_path().is_file()


def test_environment_overrides(clean_env, empty_env_file):
    clean_env.setenv("HAZEFUSE_DICT", "/srv/dict.json")
    clean_env.setenv("HAZEFUSE_SCAN_WORKERS", "4")
    clean_env.setenv("LOG_LEVEL", "DEBUG")
    config = load_config(empty_env_file)
    assert config["dictionary_path"] == Path("/srv/dict.json")
    assert config["scan_workers"] == 4
    assert config["log_level"] == "DEBUG"


def test_env_file_is_read(clean_env, tmp_path):
    env_file = tmp_path / "run.env"
    env_file.write_text("HAZEFUSE_EVAL_INTERVAL_S=5\nHAZEFUSE_THETA_NEW=8\n")
    config = load_config(env_file)
    assert config["weather_eval_interval_s"] == 5.0
    assert config["theta_new"] == 8.0


def test_bad_number_names_the_variable(clean_env, empty_env_file):
    clean_env.setenv("HAZEFUSE_THETA_DEV", "three")
    with pytest.raises(ValidationError, match="HAZEFUSE_THETA_DEV"):
        load_config(empty_env_file)


@pytest.mark.parametrize(
    "key, value",
    [
        ("HAZEFUSE_THETA_DEV", "7"),
        ("HAZEFUSE_THETA_DEV", "0"),
        ("HAZEFUSE_EVAL_INTERVAL_S", "0"),
        ("HAZEFUSE_FEATURE_WINDOW_S", "-1"),
        ("HAZEFUSE_SCAN_WORKERS", "0"),
    ],
)
def test_out_of_range_values_are_rejected(clean_env, empty_env_file, key, value):
    clean_env.setenv(key, value)
    with pytest.raises(ValidationError):
        load_config(empty_env_file)


def test_ensure_directories(clean_env, empty_env_file, tmp_path):
    config = load_config(empty_env_file)
    ensure_directories(config)
    assert (tmp_path / "output").is_dir()


def test_setup_logging_writes_package_logs_to_file(tmp_path):
    package = logging.getLogger("hazefuse")
    root = logging.getLogger()
    before = list(package.handlers), list(root.handlers)
    log_file = tmp_path / "logs" / "hazefuse.log"
    try:
        setup_logging(level="INFO", log_file=log_file)
        assert any(isinstance(h, logging.FileHandler) for h in package.handlers)
        logging.getLogger("hazefuse.processing.fusion").warning("uniform weights")
        assert "uniform weights" in log_file.read_text()
    finally:
        for logger, kept in zip((package, root), before):
            for handler in logger.handlers[:]:
                if handler not in kept:
                    logger.removeHandler(handler)
                    handler.close()
