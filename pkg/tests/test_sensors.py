"""
Tests for the simulated sensors
"""
import numpy as np
import pytest

from hazefuse.core.exceptions import DomainError
from hazefuse.core.random_streams import RandomStreams
from hazefuse.core.world import WeatherSample, initial_state
from hazefuse.sensors.ais import ais_detections, ais_receive
from hazefuse.sensors.attenuation import (
    band_visibility,
    detection_range,
    eo_scan,
    extinction_coefficient,
    visibility_from_aerosol,
)
from hazefuse.sensors.radar import RadarDifferencer, radar_scan, sonar_scan
from hazefuse.sensors.types import Detection, SensorConfig
from hazefuse.sensors.weather_sensors import weather_sensors_read

from tests.conftest import CLEAR, HAZE, vessel

ORIGIN = (0.0, 0.0)


# --- attenuation and EO -----------------------------------------------------

@pytest.mark.parametrize("psi, expected", [(230, 5000.0), (0, 10000.0), (460, 2500.0)])
def test_visibility_calibration(psi, expected):
    assert visibility_from_aerosol(psi) == pytest.approx(expected, rel=0.01)


def test_visibility_is_capped_and_monotone():
    values = [visibility_from_aerosol(psi) for psi in np.linspace(0, 2000, 201)]
    assert all(0 < v <= 10000.0 for v in values)
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_negative_aerosol_is_a_domain_error():
    with pytest.raises(DomainError):
        visibility_from_aerosol(-1)


def test_ir_extinction_is_weaker():
    assert extinction_coefficient(230, "ir") == pytest.approx(0.4 * extinction_coefficient(230, "vis"))
    assert band_visibility(230, "ir") == pytest.approx(12500.0, rel=0.01)


def test_low_contrast_target_is_never_seen():
    assert detection_range(0.04, 1e-4, 0.05, 12000) == 0.0


def test_hardware_range_caps_detection():
    assert detection_range(1.0, 1e-6, 0.05, 12000) == 12000


def test_ir_sees_small_vessel_that_vis_misses(scenario_factory):
    scenario = scenario_factory(vessels=[vessel("skiff", (4500, 0), size_class="small")])
    world = initial_state(scenario)
    cfg = SensorConfig()
    assert eo_scan(world, ORIGIN, cfg, "vis", 230) == []
    ir = eo_scan(world, ORIGIN, cfg, "ir", 230)
    assert len(ir) == 1
    assert ir[0].position_m == (4500.0, 0.0)
    assert ir[0].source == "eo_ir"


def test_ir_output_contains_vis_output(scenario_factory):
    vessels = [vessel(f"v{i}", (1000.0 * i, 500.0), size_class=c) for i, c in enumerate(["small", "medium", "large"] * 4, 1)]
    world = initial_state(scenario_factory(vessels=vessels))
    cfg = SensorConfig()
    for psi in (0, 100, 230, 460, 900):
        vis = {d.position_m for d in eo_scan(world, ORIGIN, cfg, "vis", psi)}
        ir = {d.position_m for d in eo_scan(world, ORIGIN, cfg, "ir", psi)}
        assert vis <= ir


def test_eo_confidence_decays_with_range(scenario_factory):
    world = initial_state(scenario_factory(vessels=[vessel("a", (1000, 0), size_class="large")]))
    (det,) = eo_scan(world, ORIGIN, SensorConfig(), "vis", 230)
    assert det.confidence == pytest.approx(np.exp(-3.912 / 5000.0 * 1000))


# --- radar and sonar --------------------------------------------------------

def _radar_rate(world, n, seed=1):
    rng = np.random.default_rng(seed)
    cfg = SensorConfig()
    return sum(len(radar_scan(world, ORIGIN, cfg, rng)) for _ in range(n)) / n


def test_radar_shadow_hides_near_targets(scenario_factory):
    world = initial_state(scenario_factory(vessels=[vessel("near", (1500, 0), size_class="large")]))
    assert _radar_rate(world, 500) == 0.0


def test_radar_detects_large_target_at_ten_km(scenario_factory):
    world = initial_state(scenario_factory(vessels=[vessel("far", (10000, 0), size_class="large")]))
    assert _radar_rate(world, 2000) == pytest.approx(0.99, abs=0.02)


def test_radar_max_range(scenario_factory):
    world = initial_state(scenario_factory(vessels=[vessel("horizon", (250000, 0), size_class="large")]))
    assert _radar_rate(world, 200) == 0.0


def test_radar_noise_is_bounded(scenario_factory):
    world = initial_state(scenario_factory(vessels=[vessel("a", (6000, 0), size_class="large")]))
    rng = np.random.default_rng(3)
    cfg = SensorConfig()
    for _ in range(500):
        for det in radar_scan(world, ORIGIN, cfg, rng):
            assert abs(det.position_m[0] - 6000) <= 25.0
            assert abs(det.position_m[1]) <= 25.0


def test_radar_ignores_weather(scenario_factory):
    vessels = [vessel("a", (6000, 0), size_class="small"), vessel("b", (0, 9000), size_class="medium")]
    clear = initial_state(scenario_factory(vessels=vessels))
    hazy = initial_state(
        scenario_factory(vessels=vessels, weather_timeline=[dict(t_start_s=0, t_end_s=60, label="hazy", **HAZE)])
    )
    cfg = SensorConfig()
    rng_a, rng_b = np.random.default_rng(5), np.random.default_rng(5)
    for _ in range(50):
        assert radar_scan(clear, ORIGIN, cfg, rng_a) == radar_scan(hazy, ORIGIN, cfg, rng_b)


def test_sonar_sees_submerged_obstacle(scenario_factory):
    world = initial_state(
        scenario_factory(
            vessels=[vessel("boat", (500, 0))],
            obstacles=[{"id": "reef", "position_m": [0, 500], "submerged": True}],
        )
    )
    rng = np.random.default_rng(2)
    cfg = SensorConfig()
    scans = [sonar_scan(world, ORIGIN, cfg, rng) for _ in range(2000)]
    assert sum(len(s) for s in scans) / 2000 == pytest.approx(0.9, abs=0.03)
    assert all(abs(d.position_m[0]) <= 50.0 for s in scans for d in s)


def test_sonar_range_limit(scenario_factory):
    world = initial_state(scenario_factory(obstacles=[{"id": "reef", "position_m": [0, 1500], "submerged": True}]))
    rng = np.random.default_rng(2)
    assert all(sonar_scan(world, ORIGIN, SensorConfig(), rng) == [] for _ in range(100))


def test_differencer_recovers_velocity():
    differencer = RadarDifferencer()
    first = differencer.apply([Detection("radar", 0.0, 0, (5000.0, 0.0))])
    assert first[0].velocity_mps is None
    for t in range(1, 6):
        scan = differencer.apply([Detection("radar", float(t), 0, (5000.0 + 10.0 * t, -5.0 * t))])
    assert scan[0].velocity_mps == pytest.approx((10.0, -5.0))


def test_differencer_breaks_chain_on_jump():
    differencer = RadarDifferencer(gate_m=200.0)
    differencer.apply([Detection("radar", 0.0, 0, (5000.0, 0.0))])
    (det,) = differencer.apply([Detection("radar", 1.0, 0, (9000.0, 0.0))])
    assert det.velocity_mps is None


# --- AIS --------------------------------------------------------------------

def test_ais_one_message_per_equipped_vessel_and_station(scenario_factory):
    scenario = scenario_factory(
        vessels=[
            vessel("a", (1000, 0), ais=True),
            vessel("b", (2000, 0), ais=True),
            vessel("c", (3000, 0), ais=True),
            vessel("skiff", (500, 0), size_class="small"),
        ],
        remote_stations=[{"id": "buoy", "position_m": [0, 8000]}],
    )
    messages = ais_receive(initial_state(scenario), scenario)
    assert [m.sender_id for m in messages] == ["a", "b", "c", "buoy"]
    assert messages[-1].is_station
    assert [d.object_hint for d in ais_detections(messages)] == ["a", "b", "c"]


def test_ais_annex_is_true_weather(scenario_factory):
    scenario = scenario_factory(vessels=[vessel("a", (1000, 0), ais=True)])
    (message,) = ais_receive(initial_state(scenario), scenario)
    assert message.weather_annex.psi == CLEAR["psi"]
    assert message.weather_annex.humidity_pct == CLEAR["humidity_pct"]
    assert message.position_m == (1000.0, 0.0)


def test_ais_annex_can_be_disabled(scenario_factory):
    scenario = scenario_factory(vessels=[vessel("a", (1000, 0), ais=True, weather_annex=False)])
    (message,) = ais_receive(initial_state(scenario), scenario)
    assert message.weather_annex is None


# --- weather sensors and random streams -------------------------------------

def test_weather_sensor_mean_is_unbiased():
    sample = WeatherSample(label="hazy", **HAZE)
    cfg = SensorConfig().weather_sensor_noise
    rng = np.random.default_rng(11)
    reads = [weather_sensors_read(sample, cfg, rng)["psi"] for _ in range(10000)]
    assert np.mean(reads) == pytest.approx(230.0, abs=0.15)


def test_weather_sensor_reads_requested_channels_only():
    sample = WeatherSample(label="clear_sunny", **CLEAR)
    readings = weather_sensors_read(sample, SensorConfig().weather_sensor_noise, np.random.default_rng(0), ["psi"])
    assert list(readings) == ["psi"]


def test_weather_sensor_clamps_humidity():
    sample = WeatherSample(psi=0, rain_mmph=0, wind_mps=0, humidity_pct=100, luminance_lux=0)
    rng = np.random.default_rng(4)
    for _ in range(200):
        readings = weather_sensors_read(sample, SensorConfig().weather_sensor_noise, rng)
        assert 0.0 <= readings["humidity_pct"] <= 100.0
        assert readings["rain_mmph"] >= 0.0


def test_random_streams_are_independent_of_creation_order():
    first = RandomStreams(42)
    a1 = first.stream("radar").random(5)
    b1 = first.stream("sonar").random(5)
    second = RandomStreams(42)
    b2 = second.stream("sonar").random(5)
    a2 = second.stream("radar").random(5)
    np.testing.assert_array_equal(a1, a2)
    np.testing.assert_array_equal(b1, b2)
    assert not np.array_equal(a1, b1)


def test_random_streams_differ_by_seed():
    assert RandomStreams(1).stream("radar").random() != RandomStreams(2).stream("radar").random()
