"""
Shared fixtures for hazefuse tests
"""
import copy
from pathlib import Path

import pytest

from hazefuse.analysis.templates import SettingsDirective, WeatherTemplate, WeightSpec
from hazefuse.analysis.weather_network import WeatherStateNetwork, load_dictionary
from hazefuse.core.scenario import load_scenario, parse_scenario
from hazefuse.harness.event_log import EventLog, read_event_log
from hazefuse.harness.runner import RunSettings, SimulationRunner
from hazefuse.utils.config import default_dictionary_path

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "data" / "scenarios"

CLEAR = {"psi": 20.0, "rain_mmph": 0.0, "wind_mps": 5.0, "humidity_pct": 55.0, "luminance_lux": 60000.0}
HAZE = {"psi": 230.0, "rain_mmph": 0.0, "wind_mps": 3.0, "humidity_pct": 75.0, "luminance_lux": 15000.0}

BASE_SCENARIO = {
    "duration_s": 60,
    "dt_s": 1.0,
    "seed": 1,
    "amv": {"id": "amv", "legs": [{"start_time_s": 0, "position_m": [0, 0], "velocity_mps": [0, 0]}]},
    "vessels": [],
    "obstacles": [],
    "weather_timeline": [dict(t_start_s=0, t_end_s=60, label="clear_sunny", **CLEAR)],
    "remote_stations": [],
}


def scenario_document(**overrides) -> dict:
    """Deep copy of the base scenario document with top-level overrides"""
    document = copy.deepcopy(BASE_SCENARIO)
    document.update(copy.deepcopy(overrides))
    return document


def vessel(vid, position, velocity=(0.0, 0.0), size_class="medium", ais=False, **extra) -> dict:
    return {
        "id": vid,
        "size_class": size_class,
        "ais_equipped": ais,
        "legs": [{"start_time_s": 0, "position_m": list(position), "velocity_mps": list(velocity)}],
        **extra,
    }


def make_template(name, mu, sigma=None, count=50, family="haze", schedule=None, **extra) -> WeatherTemplate:
    sigma = sigma or {c: 1.0 for c in mu}
    weights = {
        "haze": dict(
            near={"eo_vis": 0.6, "eo_ir": 0.3, "radar": 0.1},
            mid={"eo_vis": 0.1, "eo_ir": 0.6, "radar": 0.3},
            far={"eo_vis": 0.0, "eo_ir": 0.1, "radar": 0.9},
        ),
        "clear": dict(
            near={"eo_vis": 0.7, "eo_ir": 0.3, "radar": 0.0},
            mid={"eo_vis": 0.3, "eo_ir": 0.1, "radar": 0.6},
            far={"eo_vis": 0.3, "eo_ir": 0.1, "radar": 0.6},
        ),
    }[family]
    return WeatherTemplate(
        name=name,
        mu=dict(mu),
        sigma=dict(sigma),
        count=count,
        schedule=schedule or {"humidity": 60, "aerosol": 60, "rain": 60, "wind": 10, "luminance": 60},
        weights=WeightSpec(family=family, **weights),
        settings=SettingsDirective(),
        **extra,
    )


@pytest.fixture
def scenario_factory():
    def build(**overrides):
        return parse_scenario(scenario_document(**overrides))

    return build


@pytest.fixture
def bootstrap_network() -> WeatherStateNetwork:
    return load_dictionary(default_dictionary_path())


@pytest.fixture
def scenarios_dir() -> Path:
    return SCENARIO_DIR


CONFIG_KEYS = (
    "LOG_LEVEL",
    "HAZEFUSE_LOG_FILE",
    "HAZEFUSE_DICT",
    "HAZEFUSE_EVAL_INTERVAL_S",
    "HAZEFUSE_FEATURE_WINDOW_S",
    "HAZEFUSE_THETA_DEV",
    "HAZEFUSE_THETA_NEW",
    "HAZEFUSE_BROADCAST_INTERVAL_S",
    "HAZEFUSE_SCAN_WORKERS",
    "HAZEFUSE_OUTPUT_DIR",
)


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    """Unset every hazefuse variable and restore it afterwards, including values a .env file sets"""
    for key in CONFIG_KEYS:
        monkeypatch.setenv(key, "")
        monkeypatch.delenv(key)
    monkeypatch.setenv("HAZEFUSE_OUTPUT_DIR", str(tmp_path / "output"))
    return monkeypatch


def run_scenario(path, log_path, seed=None, **settings):
    """Run a scenario file against a fresh bootstrap dictionary"""
    scenario = load_scenario(path)
    runner = SimulationRunner(scenario, load_dictionary(default_dictionary_path()), RunSettings(**settings), seed=seed)
    with EventLog(log_path) as log:
        summary = runner.run(log)
    return runner, summary, read_event_log(log_path)
