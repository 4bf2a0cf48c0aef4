"""
Run metrics for hazefuse
Scores an event log against the ground truth replayed from its scenario
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from hazefuse.core.exceptions import MismatchedScenario
from hazefuse.core.scenario import Scenario, load_scenario
from hazefuse.core.world import TIME_EPS, ObjectState, WorldSimulator, WorldState
from hazefuse.harness.event_log import EventRecord, read_event_log
from hazefuse.sensors.types import SensorConfig, Source

logger = logging.getLogger(__name__)

MATCH_RADIUS_M = 150.0
NEED_TO_LEARN_ALERT = 0.5
SENSOR_SOURCES = tuple(source.value for source in Source)


@dataclass
class SensorMetrics:
    """Detection quality of one source (or of the fused output)"""
    detections: int = 0
    matched_detections: int = 0
    truth_instances: int = 0
    matched_truth: int = 0
    coverage_instances: int = 0
    matched_coverage: int = 0
    class_instances: Dict[str, int] = field(default_factory=dict)
    class_matched: Dict[str, int] = field(default_factory=dict)

    @property
    def precision(self) -> float:
        return self.matched_detections / self.detections if self.detections else 1.0

    @property
    def recall(self) -> float:
        return self.matched_truth / self.truth_instances if self.truth_instances else 1.0

    @property
    def coverage_recall(self) -> float:
        return self.matched_coverage / self.coverage_instances if self.coverage_instances else 1.0

    @property
    def recall_by_class(self) -> Dict[str, float]:
        return {
            cls: self.class_matched.get(cls, 0) / n
            for cls, n in sorted(self.class_instances.items())
            if n > 0
        }

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "coverage_recall": self.coverage_recall,
            "recall_by_class": self.recall_by_class,
            "detections": self.detections,
            "truth_instances": self.truth_instances,
            "coverage_instances": self.coverage_instances,
        }


@dataclass
class MetricsReport:
    sensors: Dict[str, SensorMetrics]
    fused: SensorMetrics
    weather_latency_s: Dict[str, Optional[float]]
    alert_lead_times: List[dict]
    need_to_learn_alerts: int

    def to_dict(self) -> dict:
        return {
            "sensors": {name: m.to_dict() for name, m in sorted(self.sensors.items())},
            "fused": self.fused.to_dict(),
            "weather_latency_s": self.weather_latency_s,
            "alert_lead_times": self.alert_lead_times,
            "need_to_learn_alerts": self.need_to_learn_alerts,
        }


def match_positions(detected: Sequence[Tuple[float, float]], truth: Sequence[Tuple[float, float]], radius_m: float = MATCH_RADIUS_M) -> Tuple[int, Set[int]]:
    """
    Greedy one-to-one matching by ascending distance within radius_m

    Returns:
        (number of matched detections, indices of matched truth objects)
    """
    if not detected or not truth:
        return 0, set()
    distances = cdist(np.asarray(detected, dtype=float), np.asarray(truth, dtype=float))
    rows, cols = np.nonzero(distances <= radius_m)
    order = sorted(zip(distances[rows, cols], rows, cols))
    used_rows: Set[int] = set()
    used_cols: Set[int] = set()
    for _, r, c in order:
        if r in used_rows or c in used_cols:
            continue
        used_rows.add(int(r))
        used_cols.add(int(c))
    return len(used_rows), used_cols


def in_coverage(source: str, target: ObjectState, own_pos: Tuple[float, float], cfg: SensorConfig) -> bool:
    """Whether a truth object lies inside a sensor's nominal coverage"""
    distance = target.range_to(own_pos)
    if source == Source.RADAR.value:
        return not target.submerged and cfg.radar.r_min_m <= distance <= cfg.radar.r_max_m
    if source == Source.SONAR.value:
        return distance <= cfg.sonar.r_max_m and (target.submerged or not cfg.sonar.submerged_only)
    if source in (Source.EO_VIS.value, Source.EO_IR.value):
        return not target.submerged and distance <= cfg.eo.hw_range_m
    if source == Source.AIS.value:
        return target.kind == "vessel" and target.ais_equipped
    return False


def _score(metrics: SensorMetrics, positions, world: WorldState, coverage) -> None:
    truth = world.all_targets()
    matched_dets, matched_truth = match_positions(positions, [t.position_m for t in truth])
    metrics.detections += len(positions)
    metrics.matched_detections += matched_dets
    metrics.truth_instances += len(truth)
    metrics.matched_truth += len(matched_truth)
    for index, target in enumerate(truth):
        if not coverage(target):
            continue
        metrics.coverage_instances += 1
        metrics.class_instances[target.size_class] = metrics.class_instances.get(target.size_class, 0) + 1
        if index in matched_truth:
            metrics.matched_coverage += 1
            metrics.class_matched[target.size_class] = metrics.class_matched.get(target.size_class, 0) + 1


def check_log_matches(records: Sequence[EventRecord], scenario: Scenario) -> None:
    """Raise MismatchedScenario when the log cannot come from this scenario"""
    senders = {v.id for v in scenario.vessels} | {s.id for s in scenario.remote_stations}
    for record in records:
        if record.t_s > scenario.duration_s + TIME_EPS:
            raise MismatchedScenario(f"record at t={record.t_s:g} beyond duration {scenario.duration_s:g}")
        if record.kind == "broadcast" and record.payload.get("sender_id") != scenario.amv.id:
            raise MismatchedScenario(f"broadcast from '{record.payload.get('sender_id')}', scenario AMV is '{scenario.amv.id}'")
        if record.kind == "ais" and record.payload.get("sender_id") not in senders:
            raise MismatchedScenario(f"AIS sender '{record.payload.get('sender_id')}' not in scenario")


def weather_latencies(records: Sequence[EventRecord], scenario: Scenario) -> Dict[str, Optional[float]]:
    """Time from each segment start to the first weather_state naming its label"""
    states = [(r.t_s, r.payload.get("template")) for r in records if r.kind == "weather_state"]
    latencies = {}
    for segment in scenario.segments:
        key = f"{segment.label or 'unlabelled'}@{segment.t_start_s:g}"
        hits = [t for t, name in states if segment.t_start_s - TIME_EPS <= t < segment.t_end_s and name == segment.label]
        latencies[key] = max(0.0, hits[0] - segment.t_start_s) if hits else None
    return latencies


def compute_metrics(
    log: Union[Path, Sequence[EventRecord]],
    scenario: Union[Path, Scenario],
    sensor_cfg: Optional[SensorConfig] = None,
) -> MetricsReport:
    """
    Score a run against replayed ground truth

    Args:
        log: Event log path or parsed records
        scenario: Scenario path or object the run used
        sensor_cfg: Sensor configuration of the run, for coverage

    Returns:
        MetricsReport

    Raises:
        MismatchedScenario: the log does not belong to the scenario
    """
    records = read_event_log(log) if isinstance(log, (str, Path)) else list(log)
    scenario = load_scenario(scenario) if isinstance(scenario, (str, Path)) else scenario
    cfg = sensor_cfg or SensorConfig()
    check_log_matches(records, scenario)

    by_tick: Dict[float, Dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for record in records:
        tick = round(record.t_s, 6)
        if record.kind == "detection":
            by_tick[tick][record.payload["source"]].append(tuple(record.payload["position_m"]))
        elif record.kind == "fused":
            by_tick[tick]["fused"].extend(tuple(o["position_m"]) for o in record.payload["objects"])

    sensors = {source: SensorMetrics() for source in SENSOR_SOURCES}
    fused = SensorMetrics()
    for world in WorldSimulator(scenario).states():
        tick = by_tick.get(round(world.t_s, 6), {})
        own_pos = world.own.position_m
        for source in SENSOR_SOURCES:
            _score(sensors[source], tick.get(source, []), world, lambda t, s=source: in_coverage(s, t, own_pos, cfg))
        _score(fused, tick.get("fused", []), world, lambda t: True)

    alerts = [
        {"t_s": r.t_s, "fid": r.payload.get("fid"), "identity": r.payload.get("identity"), "lead_s": r.payload.get("t_cpa_s")}
        for r in records
        if r.kind == "risk_alert"
    ]
    ntl = sum(1 for r in records if r.kind == "need_to_learn" and (r.payload.get("score") or 0.0) >= NEED_TO_LEARN_ALERT)

    report = MetricsReport(sensors, fused, weather_latencies(records, scenario), alerts, ntl)
    logger.info(
        f"Metrics: fused recall {fused.recall:.3f}, precision {fused.precision:.3f} "
        f"over {fused.truth_instances} truth instances"
    )
    return report
