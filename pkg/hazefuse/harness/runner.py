"""
Tick-loop runner for hazefuse

Wires world -> scheduled weather sensors -> weather engine -> sensor management ->
imaging scans -> fusion -> risk and awareness, and writes every step to the event log.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from hazefuse.analysis.features import extract_features
from hazefuse.analysis.weather_network import (
    THETA_DEV,
    THETA_NEW,
    WeatherAssessment,
    WeatherStateNetwork,
    detect_weather,
    forecast,
    forecast_steps,
    learn,
    rank_templates,
)
from hazefuse.core.random_streams import RandomStreams
from hazefuse.core.scenario import Scenario
from hazefuse.core.world import WorldSimulator, WorldState, true_weather_at
from hazefuse.harness.event_log import EventLog
from hazefuse.processing.awareness import (
    AwarenessMonitor,
    AwarenessReport,
    WeatherPicture,
    need_to_learn,
    weather_awareness,
)
from hazefuse.processing.fusion import FusionEngine
from hazefuse.processing.risk import RiskParams, assess_risk
from hazefuse.processing.sensor_manager import SensorManager, build_schedule
from hazefuse.sensors.ais import ais_detections, ais_receive
from hazefuse.sensors.attenuation import band_visibility, eo_scan, visibility_from_aerosol
from hazefuse.sensors.radar import RadarDifferencer, radar_scan, sonar_scan
from hazefuse.sensors.types import IMAGING_SOURCES, AISMessage, Detection, SensorConfig
from hazefuse.sensors.weather_sensors import SENSOR_CHANNELS, weather_sensors_read

FORECAST_HORIZON_STEPS = 6


@dataclass
class RunSettings:
    """Runner knobs collected from the configuration"""
    weather_eval_interval_s: float = 10.0
    feature_window_s: float = 20.0
    theta_dev: float = THETA_DEV
    theta_new: float = THETA_NEW
    broadcast_interval_s: float = 10.0
    scan_workers: int = 1
    risk: RiskParams = field(default_factory=RiskParams)

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "RunSettings":
        return cls(
            weather_eval_interval_s=float(config.get("weather_eval_interval_s", 10.0)),
            feature_window_s=float(config.get("feature_window_s", 20.0)),
            theta_dev=float(config.get("theta_dev", THETA_DEV)),
            theta_new=float(config.get("theta_new", THETA_NEW)),
            broadcast_interval_s=float(config.get("broadcast_interval_s", 10.0)),
            scan_workers=int(config.get("scan_workers", 1)),
        )


@dataclass
class RunSummary:
    ticks: int = 0
    records: int = 0
    weather_changes: int = 0
    templates_learned: List[str] = field(default_factory=list)
    alerts: int = 0
    final_template: Optional[str] = None


def on_cadence(t_s: float, interval_s: float) -> bool:
    ratio = t_s / interval_s
    return abs(ratio - round(ratio)) < 1e-9


def _detection_payload(det: Detection) -> dict:
    return {
        "source": det.source,
        "det_id": det.det_id,
        "position_m": det.position_m,
        "velocity_mps": det.velocity_mps,
        "size_class_estimate": det.size_class_estimate,
        "confidence": det.confidence,
    }


def _ais_payload(message: AISMessage) -> dict:
    return {
        "sender_id": message.sender_id,
        "position_m": message.position_m,
        "velocity_mps": message.velocity_mps,
        "heading_rad": message.heading_rad,
        "is_station": message.is_station,
        "weather_annex": asdict(message.weather_annex) if message.weather_annex is not None else None,
    }


class SimulationRunner:
    """Runs one scenario against a weather network and writes the event log"""

    def __init__(
        self,
        scenario: Scenario,
        network: WeatherStateNetwork,
        settings: Optional[RunSettings] = None,
        sensor_cfg: Optional[SensorConfig] = None,
        seed: Optional[int] = None,
    ):
        self.logger = logging.getLogger(__name__)
        self.scenario = scenario if seed is None else scenario.with_seed(seed)
        self.network = network
        self.settings = settings or RunSettings()
        self.sensor_cfg = sensor_cfg or SensorConfig()
        self.streams = RandomStreams(self.scenario.seed)
        # scan threads only read streams created here
        for label in ("radar", "sonar"):
            self.streams.stream(label)
        self.manager = SensorManager(network, radar_r_min_m=self.sensor_cfg.radar.r_min_m)
        self.fusion = FusionEngine(self.sensor_cfg.radar, dt_s=self.scenario.dt_s)
        self.differencer = RadarDifferencer()
        self.monitor = AwarenessMonitor()
        self.picture: Optional[WeatherPicture] = None
        self.need_to_learn = 0.0
        self._executor: Optional[ThreadPoolExecutor] = None
        # latest annex per sender: (position, readings)
        self._remote: Dict[str, Tuple[Tuple[float, float], Dict[str, float]]] = {}

    def _initial_assessment(self) -> WeatherAssessment:
        name = self.network.current or rank_templates(self.network, 0.0)[0]
        self.network.current = name
        return WeatherAssessment(((name, 1.0),), 0.0, False, 0.0)

    def run(self, log: EventLog) -> RunSummary:
        """
        Execute every tick from 0 to duration_s

        Args:
            log: Open event log to append to

        Returns:
            RunSummary
        """
        summary = RunSummary()
        known = set(self.network.nodes)
        self.manager.schedule = build_schedule(self._initial_assessment(), self.network, None, 0.0)
        log.emit(
            0.0,
            "schedule_update",
            {"template": self.network.current, "reason": "initial", "schedule": self.manager.schedule.snapshot()},
        )
        self.logger.info(
            f"Running scenario (seed {self.scenario.seed}, {self.scenario.duration_s:g} s) "
            f"starting from weather '{self.network.current}'"
        )

        if self.settings.scan_workers > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.settings.scan_workers)
        try:
            for world in WorldSimulator(self.scenario).states():
                self._tick(world, log, summary)
                log.flush()
                summary.ticks += 1
        finally:
            if self._executor is not None:
                self._executor.shutdown()
                self._executor = None

        summary.records = log.records_written
        summary.templates_learned = sorted(set(self.network.nodes) - known)
        summary.final_template = self.network.current
        self.logger.info(
            f"Run finished: {summary.ticks} ticks, {summary.records} records, "
            f"{summary.alerts} alerts, {len(summary.templates_learned)} new templates"
        )
        return summary

    def _tick(self, world: WorldState, log: EventLog, summary: RunSummary) -> None:
        t = world.t_s
        own = world.own

        self._poll_weather_sensors(world, log)

        messages = ais_receive(world, self.scenario)
        for message in messages:
            log.emit(t, "ais", _ais_payload(message))
            if message.weather_annex is not None:
                self._remote[message.sender_id] = (message.position_m, asdict(message.weather_annex))

        if on_cadence(t, self.settings.weather_eval_interval_s):
            self._evaluate_weather(t, own.position_m, log, summary)

        scans = self._scan(world)
        scans["ais"] = ais_detections(messages)
        for source in list(IMAGING_SOURCES) + ["ais"]:
            for det in scans[source]:
                log.emit(t, "detection", _detection_payload(det))

        fused = self.fusion.process(t, scans, self.manager.weights, own.position_m)
        risks = assess_risk(
            fused,
            (own.position_m, own.velocity_mps),
            self.settings.risk,
            heading_variance=self._heading_variance,
        )
        by_fid = {r.fid: r for r in risks}
        log.emit(t, "fused", {"objects": [dict(obj.summary(), risk=by_fid[obj.fid].summary()) for obj in fused]})

        for fid in self.monitor.observe_risks(t, risks):
            obj = next(o for o in fused if o.fid == fid)
            risk = by_fid[fid]
            summary.alerts += 1
            self.logger.info(
                f"High-risk contact fid={fid} ({obj.identity or obj.category}) at t={t:g}: "
                f"d_cpa={risk.d_cpa_m:.0f} m in {risk.t_cpa_s:.0f} s"
            )
            log.emit(t, "risk_alert", dict(risk.summary(), identity=obj.identity, position_m=obj.position_m))

        if on_cadence(t, self.settings.broadcast_interval_s):
            report = AwarenessReport(t, tuple(fused), tuple(risks), self.picture, self.need_to_learn)
            high = set(report.high_risk)
            log.emit(
                t,
                "broadcast",
                {
                    "sender_id": world.amv_id,
                    "position_m": own.position_m,
                    "velocity_mps": own.velocity_mps,
                    "heading_rad": own.heading_rad,
                    "weather_annex": self.manager.latest(),
                    "template": self.network.current,
                    "high_risk": [o.identity or f"fid:{o.fid}" for o in report.fused if o.fid in high],
                },
            )

    def _heading_variance(self, fid: int) -> float:
        track = self.fusion.track(fid)
        return track.heading_variance() if track is not None else 0.0

    def _poll_weather_sensors(self, world: WorldState, log: EventLog) -> None:
        t = world.t_s
        due = self.manager.due(t)
        if not due:
            return
        sample = true_weather_at(self.scenario, world.own.position_m, t)
        readings = {}
        for sensor in due:
            channel = SENSOR_CHANNELS[sensor]
            rng = self.streams.stream(f"weather:{channel}")
            readings.update(weather_sensors_read(sample, self.sensor_cfg.weather_sensor_noise, rng, [channel]))
            log.emit(t, "weather_reading", {"sensor": sensor, "channel": channel, "value": readings[channel]})
        self.manager.record(t, readings)

    def _evaluate_weather(self, t: float, own_pos, log: EventLog, summary: RunSummary) -> None:
        previous = self.network.current
        features = extract_features(self.manager.histories, self.settings.feature_window_s, t, hold_last=True)
        assessment = detect_weather(
            features,
            self.network,
            previous,
            (self.settings.theta_dev, self.settings.theta_new),
            t,
        )
        learn(self.network, assessment, features, t)
        current = self.network.current
        if current != previous:
            summary.weather_changes += 1
            self.logger.info(f"Weather changed at t={t:g}: {previous} -> {current} (distance {assessment.distance:.2f})")

        psi = features.value("psi")
        vis_m = visibility_from_aerosol(psi)
        vis_ir_m = band_visibility(psi, "ir", self.sensor_cfg.eo.alpha_ir)
        changed = self.manager.apply(assessment, t, vis_m, vis_ir_m)

        fc1 = forecast(self.network, current)
        fc6 = forecast_steps(self.network, current, FORECAST_HORIZON_STEPS)
        events = self.monitor.observe_weather(t, assessment, vis_m, fc1)
        remote = [self._remote[sender] for sender in sorted(self._remote)]
        self.picture = weather_awareness(
            assessment, remote, fc1, own_pos, forecast_6=fc6, local_readings=features.as_dict()
        )
        self.need_to_learn = need_to_learn(assessment, self.monitor.ledger.counts(t), self.settings.theta_new)

        log.emit(
            t,
            "weather_state",
            dict(
                self.picture.summary(),
                template=current,
                distance=assessment.distance,
                features=features.as_dict(),
                visibility_m=vis_m,
                visibility_ir_m=vis_ir_m,
            ),
        )
        if changed["schedule"]:
            log.emit(
                t,
                "schedule_update",
                {"template": current, "reason": "weather", "schedule": self.manager.schedule.snapshot()},
            )
        if changed["settings"]:
            log.emit(t, "settings", dict(self.manager.settings.model_dump(), template=current))
        if changed["weights"]:
            log.emit(t, "weight_profile", dict(self.manager.weights.snapshot(), template=current))
        log.emit(t, "need_to_learn", {"score": self.need_to_learn, "events": events, "template": current})

    def _scan(self, world: WorldState) -> Dict[str, List[Detection]]:
        own_pos = world.own.position_m
        psi = true_weather_at(self.scenario, own_pos, world.t_s).psi
        cfg = self.sensor_cfg
        jobs: Dict[str, Callable[[], List[Detection]]] = {
            "radar": lambda: radar_scan(world, own_pos, cfg, self.streams.stream("radar")),
            "sonar": lambda: sonar_scan(world, own_pos, cfg, self.streams.stream("sonar")),
            "eo_vis": lambda: eo_scan(world, own_pos, cfg, "vis", psi),
            "eo_ir": lambda: eo_scan(world, own_pos, cfg, "ir", psi),
        }
        if self._executor is not None:
            futures = {source: self._executor.submit(jobs[source]) for source in IMAGING_SOURCES}
            scans = {source: futures[source].result() for source in IMAGING_SOURCES}
        else:
            scans = {source: jobs[source]() for source in IMAGING_SOURCES}
        scans["radar"] = self.differencer.apply(scans["radar"])
        return scans
