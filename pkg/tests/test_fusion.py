"""
Tests for association, weighted fusion, track memory and unmatched classification
"""
import logging
import math

import numpy as np
import pytest

from hazefuse.analysis.weather_network import WeatherAssessment
from hazefuse.processing.fusion import (
    AssociationParams,
    Candidate,
    FusionEngine,
    Track,
    TrackMemory,
    TrackPoint,
    affinity,
    associate,
    classify_unmatched,
    fuse_position,
)
from hazefuse.processing.risk import assess_risk
from hazefuse.processing.sensor_manager import WeightProfile, Zone, build_weights
from hazefuse.sensors.types import Detection, RadarConfig

FAR = (-20000.0, 0.0)  # own position that puts targets near the origin in the haze far zone
MID = (-5000.0, 0.0)
STILL = ((0.0, 0.0), (0.0, 0.0))


def det(source, position, det_id=0, t_s=0.0, velocity=None, hint=None, size=None):
    return Detection(
        source=source,
        t_s=t_s,
        det_id=det_id,
        position_m=position,
        velocity_mps=velocity,
        object_hint=hint,
        size_class_estimate=size,
    )


def ais(position, velocity=(0.0, 0.0), hint="alpha", det_id=0, t_s=0.0):
    return det("ais", position, det_id=det_id, t_s=t_s, velocity=velocity, hint=hint)


@pytest.fixture
def haze_profile(bootstrap_network):
    assessment = WeatherAssessment((("hazy", 1.0),), 0.0, False, 0.0)
    return build_weights(assessment, bootstrap_network, vis_m=5000.0, vis_ir_m=12500.0)


def test_affinity_at_one_sigma():
    a = det("radar", (0.0, 0.0), velocity=(1.0, 0.0))
    b = ais((100.0, 0.0), velocity=(1.0, 0.0))
    assert affinity(a, b) == pytest.approx(math.exp(-0.5))


def test_affinity_ignores_missing_velocity():
    a = det("eo_ir", (0.0, 0.0))
    b = det("radar", (200.0, 0.0), velocity=(30.0, 0.0))
    assert affinity(a, b) == pytest.approx(math.exp(-2.0))


def test_close_pair_merges(haze_profile):
    groups, unmatched = associate([det("radar", (0.0, 0.0)), det("eo_ir", (100.0, 0.0))], haze_profile, MID)
    assert len(groups) == 1 and not unmatched


def test_loose_pair_merges_only_with_ais(haze_profile):
    groups, _ = associate([det("radar", (0.0, 0.0)), ais((200.0, 0.0))], haze_profile, MID)
    assert len(groups) == 1
    groups, unmatched = associate([det("radar", (0.0, 0.0)), det("eo_vis", (200.0, 0.0))], haze_profile, MID)
    assert groups == []
    assert len(unmatched) == 2


def test_loose_pair_merges_when_both_zone_weights_are_high(haze_profile):
    groups, _ = associate([det("radar", (0.0, 0.0)), det("eo_ir", (200.0, 0.0))], haze_profile, MID)
    assert len(groups) == 1


def test_tighter_gate_splits_close_pair(haze_profile):
    strict = AssociationParams(sigma_p=20.0)
    groups, unmatched = associate([det("radar", (0.0, 0.0)), det("eo_ir", (100.0, 0.0))], haze_profile, MID, strict)
    assert groups == []
    assert len(unmatched) == 2


def test_same_source_never_shares_a_group(haze_profile):
    groups, unmatched = associate(
        [det("radar", (0.0, 0.0), det_id=0), det("radar", (10.0, 0.0), det_id=1)], haze_profile, MID
    )
    assert groups == []
    assert len(unmatched) == 2


def test_every_detection_is_placed_once(haze_profile):
    detections = {
        "radar": [det("radar", (0.0, 0.0), 0), det("radar", (3000.0, 0.0), 1)],
        "eo_ir": [det("eo_ir", (40.0, 0.0), 0), det("eo_ir", (9000.0, 0.0), 1)],
        "ais": [ais((20.0, 0.0))],
    }
    groups, unmatched = associate(detections, haze_profile, MID)
    placed = [d for g in groups for d in g] + unmatched
    assert sorted(d.key for d in placed) == sorted(d.key for batch in detections.values() for d in batch)
    assert len(groups[0]) == 3


def test_association_ignores_input_order(haze_profile):
    detections = [
        det("radar", (0.0, 0.0), 0),
        det("radar", (150.0, 0.0), 1),
        det("eo_ir", (75.0, 0.0), 0),
        det("eo_vis", (75.0, 40.0), 0),
        ais((3000.0, 0.0)),
        det("radar", (3020.0, 0.0), 2),
        det("sonar", (9000.0, 0.0), 0),
    ]
    expected = associate(detections, haze_profile, MID)
    rng = np.random.default_rng(7)
    for order in [detections[::-1]] + [[detections[i] for i in rng.permutation(len(detections))] for _ in range(5)]:
        assert associate(order, haze_profile, MID) == expected


def test_lone_ais_report_is_a_group(haze_profile):
    groups, unmatched = associate([ais((0.0, 0.0))], haze_profile, MID)
    assert len(groups) == 1 and unmatched == []


def test_fused_position_is_ais_dominated(haze_profile):
    position, velocity = fuse_position(
        [ais((0.0, 0.0), velocity=(3.0, 1.0)), det("radar", (60.0, 0.0), velocity=(2.0, 0.0))], haze_profile, FAR
    )
    assert position[0] == pytest.approx(60.0 * 0.9 / 2.9)
    assert position[1] == 0.0
    assert velocity == (3.0, 1.0)


def test_fused_velocity_falls_back_to_radar(haze_profile):
    _, velocity = fuse_position([det("eo_ir", (0.0, 0.0)), det("radar", (50.0, 0.0), velocity=(4.0, 0.0))], haze_profile, MID)
    assert velocity == (4.0, 0.0)


def test_zero_weights_fall_back_to_uniform(caplog):
    profile = WeightProfile((Zone(0.0, math.inf, {"eo_vis": 0.0, "eo_ir": 1.0, "radar": 0.0}),))
    with caplog.at_level(logging.WARNING):
        position, _ = fuse_position([det("radar", (0.0, 0.0)), det("eo_vis", (100.0, 0.0))], profile)
    assert position == (50.0, 0.0)
    assert "uniform" in caplog.text


def test_track_memory_keeps_fid_for_moving_contact():
    memory = TrackMemory()
    fids = []
    for t in range(5):
        position = (5000.0 + 15.0 * t, 0.0)
        (track,) = memory.update(float(t), [Candidate((det("radar", position, t_s=t),), position, None)])
        fids.append(track.fid)
    assert fids == [0] * 5
    assert memory.tracks[0].fitted_velocity() == pytest.approx((15.0, 0.0))


def test_track_memory_matches_ais_identity_beyond_gate():
    memory = TrackMemory()
    first = Candidate((ais((0.0, 0.0), hint="bravo"),), (0.0, 0.0), (0.0, 0.0))
    (track,) = memory.update(0.0, [first])
    jumped = Candidate((ais((900.0, 0.0), hint="bravo", t_s=1.0),), (900.0, 0.0), (0.0, 0.0))
    (again,) = memory.update(1.0, [jumped])
    assert again.fid == track.fid
    assert again.identity == "bravo"


def test_track_memory_drops_stale_tracks():
    memory = TrackMemory(max_misses=5)
    memory.update(0.0, [Candidate((det("radar", (5000.0, 0.0)),), (5000.0, 0.0), None)])
    memory.update(6.0, [])
    assert memory.tracks == {}


def _track(points):
    track = Track(fid=0)
    for point in points:
        track.add(point)
    return track


def test_one_tick_blip_is_spurious():
    track = _track([TrackPoint(10.0, (6000.0, 0.0), ("radar",), 6000.0)])
    assert classify_unmatched(track, RadarConfig(), now_t=10.0) == "spurious"


def test_persistent_eo_contact_in_shadow_is_small_object():
    track = _track([TrackPoint(float(t), (1500.0, 0.0), ("eo_ir",), 1500.0) for t in range(3)])
    assert classify_unmatched(track, RadarConfig(), now_t=2.0) == "small_object"


def test_stationary_radar_contact_is_fixed_structure():
    track = _track([TrackPoint(float(t), (5000.0, 0.05 * t), ("radar",), 5000.0) for t in range(12)])
    assert classify_unmatched(track, RadarConfig(), now_t=11.0) == "fixed_structure"


def test_short_sonar_contact_is_underwater():
    track = _track([TrackPoint(float(t), (0.0, 400.0), ("sonar",), 400.0) for t in range(4)])
    assert classify_unmatched(track, RadarConfig(), now_t=3.0) == "underwater"


def test_heading_variance_separates_straight_and_zigzag():
    straight = _track([TrackPoint(float(t), (0.0, 10.0 * t), ("ais",), 0.0, (0.0, 10.0)) for t in range(10)])
    zigzag = _track(
        [TrackPoint(float(t), (0.0, 10.0 * t), ("ais",), 0.0, (10.0 if t % 2 else -10.0, 2.0)) for t in range(10)]
    )
    assert straight.heading_variance() == pytest.approx(0.0)
    assert zigzag.heading_variance() > 1.0


def test_engine_labels_groups(haze_profile):
    engine = FusionEngine(RadarConfig())
    fused = engine.process(
        0.0,
        {
            "ais": [ais((0.0, 0.0), hint="alpha")],
            "radar": [det("radar", (30.0, 0.0), 0), det("radar", (8000.0, 0.0), 1)],
            "eo_ir": [det("eo_ir", (8050.0, 0.0))],
        },
        haze_profile,
        MID,
    )
    assert [obj.fid for obj in fused] == [0, 1]
    assert fused[0].category == "ais_confirmed"
    assert fused[0].identity == "alpha"
    assert fused[1].category == "radar_eo"
    assert set(fused[1].sources) == {"radar", "eo_ir"}
    assert fused[1].spread_m > 0.0


def test_engine_keeps_ids_across_ticks(haze_profile):
    engine = FusionEngine(RadarConfig())
    for t in range(4):
        fused = engine.process(
            float(t),
            [ais((10.0 * t, 0.0), velocity=(10.0, 0.0), hint="alpha", t_s=t), det("radar", (6000.0, 0.0), t_s=t)],
            haze_profile,
            MID,
        )
    by_identity = {obj.identity: obj for obj in fused}
    assert by_identity["alpha"].fid == 0
    assert by_identity["alpha"].first_seen_t == 0.0
    assert by_identity[None].category == "small_object"


def test_engine_classifies_eo_only_group_as_unconfirmed(haze_profile):
    engine = FusionEngine(RadarConfig())
    for t in range(4):
        position = (0.0, 1500.0 + t)
        fused = engine.process(
            float(t), [det("eo_vis", position, t_s=t), det("eo_ir", position, t_s=t)], haze_profile, (0.0, 0.0)
        )
        (obj,) = fused
        assert set(obj.sources) == {"eo_vis", "eo_ir"}
        assert obj.category == "small_object"


def _reversing_contact(engine, profile, sources, start_y, speed, turn_t, duration):
    """Contact on the y axis that moves at `speed` and reverses at `turn_t`"""
    history = []
    for t in range(duration):
        y = start_y + speed * t if t <= turn_t else start_y + speed * (2 * turn_t - t)
        detections = [det(source, (0.0, y), t_s=t) for source in sources]
        (obj,) = engine.process(float(t), detections, profile, (0.0, 0.0))
        history.append(obj)
    return history


def test_contact_turning_toward_own_ship_raises_risk_promptly(haze_profile):
    engine = FusionEngine(RadarConfig())
    history = _reversing_contact(engine, haze_profile, ("eo_vis", "eo_ir"), 520.0, 10.0, 30, 60)
    levels = [assess_risk([obj], STILL)[0] for obj in history]

    assert {obj.category for obj in history} == {"small_object"}
    assert all("no_ais_small" in r.flags for r in levels)
    first_high = next(t for t, r in enumerate(levels) if r.risk == "high")
    assert 30 < first_high <= 35
    assert history[36].velocity_mps == pytest.approx((0.0, -10.0))
    assert levels[36].t_cpa_s == pytest.approx(76.0)


def test_reversing_radar_contact_is_never_fixed_structure(haze_profile):
    engine = FusionEngine(RadarConfig())
    history = _reversing_contact(engine, haze_profile, ("radar", "eo_ir"), 3000.0, 1.0, 30, 80)
    assert {obj.category for obj in history} == {"radar_eo"}
    assert engine.track(history[-1].fid).is_stationary() is False
