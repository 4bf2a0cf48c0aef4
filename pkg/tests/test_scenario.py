"""
Tests for scenario loading and validation
"""
import json

import pytest

from hazefuse.core.exceptions import ParseError, ValidationError
from hazefuse.core.scenario import load_scenario, parse_scenario, validate_scenario

from tests.conftest import CLEAR, HAZE, scenario_document, vessel


def test_base_document_parses(scenario_factory):
    scenario = scenario_factory()
    assert scenario.duration_s == 60
    assert scenario.amv.id == "amv"
    assert scenario.segments[0].label == "clear_sunny"


def test_contrast_defaults_from_size_class(scenario_factory):
    scenario = scenario_factory(
        vessels=[vessel("a", (1000, 0), size_class="small"), vessel("b", (2000, 0), size_class="large")]
    )
    assert [v.contrast for v in scenario.vessels] == [0.4, 1.0]


def test_obstacle_size_class_from_extent(scenario_factory):
    scenario = scenario_factory(
        obstacles=[
            {"id": "buoy", "position_m": [100, 0], "extent_m": 2},
            {"id": "rig", "position_m": [5000, 0], "extent_m": 150},
        ]
    )
    assert [o.size_class for o in scenario.obstacles] == ["small", "large"]


def test_weather_gap_is_rejected():
    document = scenario_document(
        weather_timeline=[
            dict(t_start_s=0, t_end_s=30, label="clear_sunny", **CLEAR),
            dict(t_start_s=40, t_end_s=60, label="hazy", **HAZE),
        ]
    )
    with pytest.raises(ValidationError) as excinfo:
        parse_scenario(document)
    assert any("gap at t=30" in line for line in excinfo.value.diagnostics)


def test_weather_overlap_is_rejected():
    document = scenario_document(
        weather_timeline=[
            dict(t_start_s=0, t_end_s=40, label="clear_sunny", **CLEAR),
            dict(t_start_s=30, t_end_s=60, label="hazy", **HAZE),
        ]
    )
    with pytest.raises(ValidationError, match="overlap"):
        parse_scenario(document)


def test_timeline_must_cover_duration():
    document = scenario_document(weather_timeline=[dict(t_start_s=0, t_end_s=30, label="clear_sunny", **CLEAR)])
    with pytest.raises(ValidationError, match="does not cover"):
        parse_scenario(document)


def test_duplicate_ids_are_rejected():
    document = scenario_document(vessels=[vessel("dup", (1000, 0)), vessel("dup", (2000, 0))])
    with pytest.raises(ValidationError, match="duplicate id: dup"):
        parse_scenario(document)


def test_unknown_key_is_rejected():
    document = scenario_document(tide="high")
    with pytest.raises(ValidationError) as excinfo:
        parse_scenario(document)
    assert "tide: unknown key" in excinfo.value.diagnostics


def test_unordered_legs_are_rejected():
    bad = vessel("a", (0, 0))
    bad["legs"].append({"start_time_s": 0, "velocity_mps": [1, 0]})
    with pytest.raises(ValidationError, match="legs not ordered"):
        parse_scenario(scenario_document(vessels=[bad]))


def test_all_diagnostics_are_collected():
    document = scenario_document(
        vessels=[vessel("dup", (1000, 0)), vessel("dup", (2000, 0))],
        weather_timeline=[dict(t_start_s=0, t_end_s=30, label="clear_sunny", **CLEAR)],
    )
    with pytest.raises(ValidationError) as excinfo:
        parse_scenario(document)
    assert len(excinfo.value.diagnostics) >= 2


def test_with_seed_replaces_only_the_seed(scenario_factory):
    scenario = scenario_factory()
    reseeded = scenario.with_seed(99)
    assert reseeded.seed == 99
    assert reseeded.duration_s == scenario.duration_s


def test_load_scenario_rejects_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    with pytest.raises(ParseError):
        load_scenario(path)


def test_validate_scenario_reports_without_raising(tmp_path):
    path = tmp_path / "gap.json"
    document = scenario_document(weather_timeline=[dict(t_start_s=0, t_end_s=30, label="clear_sunny", **CLEAR)])
    path.write_text(json.dumps(document))
    diagnostics = validate_scenario(path)
    assert diagnostics
    assert "does not cover" in diagnostics[0]


@pytest.mark.parametrize(
    "name",
    [
        "clear_smoke.json",
        "haze_ir.json",
        "radar_shadow.json",
        "clear_to_haze.json",
        "head_on.json",
        "radar_recall.json",
        "smoke_squall.json",
    ],
)
def test_bundled_scenarios_are_valid(scenarios_dir, name):
    assert validate_scenario(scenarios_dir / name) == []
