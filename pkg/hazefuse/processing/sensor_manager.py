"""
Adaptive sensor management for hazefuse

Turns a weather assessment into polling schedules for the non-imaging sensors,
range-zoned fusion weights for the imaging sensors and imaging settings directives.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from hazefuse.analysis.templates import (
    WEIGHTED_SOURCES,
    SettingsDirective,
    WeightSpec,
    blend_schedules,
    blend_weight_specs,
)
from hazefuse.analysis.weather_network import WeatherAssessment, WeatherStateNetwork
from hazefuse.core.exceptions import DomainError, UnknownSensor
from hazefuse.processing.history import DEFAULT_CAPACITY, HistoryBuffer
from hazefuse.sensors.weather_sensors import SENSOR_CHANNELS, WEATHER_SENSORS

NEAR_FIELD_CAP_M = 500.0
DEFAULT_RADAR_SHADOW_M = 2000.0
ZONE_SHIFT_TOLERANCE = 0.10
AIS_WEIGHT = 1.0


@dataclass
class SensorSchedule:
    """Polling periods and due times of the non-imaging sensors"""
    period_s: Dict[str, float]
    next_due_t: Dict[str, float]
    last_polled_t: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if any(p <= 0 for p in self.period_s.values()):
            raise DomainError("polling periods must be > 0")

    @property
    def sensors(self) -> List[str]:
        known = [s for s in WEATHER_SENSORS if s in self.period_s]
        return known + sorted(s for s in self.period_s if s not in WEATHER_SENSORS)

    def snapshot(self) -> Dict[str, Dict[str, float]]:
        return {s: {"period_s": self.period_s[s], "next_due_t": self.next_due_t[s]} for s in self.sensors}


def due_sensors(schedule: SensorSchedule, t_s: float) -> List[str]:
    """Sensors with t_s >= next_due_t, in polling order"""
    if t_s < 0:
        raise DomainError(f"time must be >= 0, got {t_s}")
    return [s for s in schedule.sensors if t_s >= schedule.next_due_t[s] - 1e-9]


def mark_polled(schedule: SensorSchedule, name: str, t_s: float) -> SensorSchedule:
    if name not in schedule.period_s:
        raise UnknownSensor(f"unknown sensor '{name}'")
    schedule.last_polled_t[name] = t_s
    schedule.next_due_t[name] = t_s + schedule.period_s[name]
    return schedule


def _periods(assessment: WeatherAssessment, network: WeatherStateNetwork) -> Dict[str, float]:
    parts = [(network.template(name), w) for name, w in assessment.matched]
    if len(parts) == 1:
        return {s: float(p) for s, p in parts[0][0].schedule.items()}
    return blend_schedules(parts)


def build_schedule(
    assessment: WeatherAssessment,
    network: WeatherStateNetwork,
    previous: Optional[SensorSchedule] = None,
    now_t: float = 0.0,
) -> SensorSchedule:
    """
    Polling schedule prescribed by the assessed weather

    A sensor keeps its previous due time unless the new period makes it due earlier;
    a sensor never polled is due now.

    Args:
        assessment: Current weather assessment
        network: Network holding the matched templates
        previous: Schedule being replaced, if any
        now_t: Time of the rebuild

    Returns:
        New SensorSchedule

    Raises:
        UnknownTemplate: a matched template is missing from the network
    """
    periods = _periods(assessment, network)
    next_due, last_polled = {}, {}
    for sensor, period in periods.items():
        polled = previous.last_polled_t.get(sensor) if previous is not None else None
        if polled is None:
            next_due[sensor] = now_t
            continue
        last_polled[sensor] = polled
        candidate = max(now_t, polled + period)
        prior = previous.next_due_t.get(sensor, candidate)
        next_due[sensor] = min(prior, candidate)
    return SensorSchedule(periods, next_due, last_polled)


@dataclass(frozen=True)
class Zone:
    d_lo_m: float
    d_hi_m: float
    weights: Dict[str, float]

    def contains(self, d: float) -> bool:
        return self.d_lo_m <= d < self.d_hi_m

    @property
    def leader(self) -> str:
        """Source with the highest weight; ties follow the weighted-source order"""
        return max(WEIGHTED_SOURCES, key=lambda s: (self.weights[s], -WEIGHTED_SOURCES.index(s)))


@dataclass(frozen=True)
class WeightProfile:
    """Contiguous range zones from 0 to infinity with per-source fusion weights"""
    zones: Tuple[Zone, ...]
    family: str = "haze"
    ais_weight: float = AIS_WEIGHT

    def __post_init__(self):
        if not self.zones or self.zones[0].d_lo_m != 0.0 or not math.isinf(self.zones[-1].d_hi_m):
            raise DomainError("zones must cover [0, inf)")
        for lower, upper in zip(self.zones, self.zones[1:]):
            if lower.d_hi_m != upper.d_lo_m:
                raise DomainError("zones must be contiguous")
        for zone in self.zones:
            if abs(sum(zone.weights[s] for s in WEIGHTED_SOURCES) - 1.0) > 1e-9:
                raise DomainError("zone weights must sum to 1")

    def zone_at(self, d: float) -> Zone:
        for zone in self.zones:
            if zone.contains(d):
                return zone
        return self.zones[-1]

    def weight_for(self, source: str, d: float) -> float:
        """Fusion weight of a source at range d; sonar borrows the radar weight"""
        if source == "ais":
            return self.ais_weight
        if source == "sonar":
            source = "radar"
        return self.zone_at(d).weights[source]

    @property
    def boundaries(self) -> Tuple[float, ...]:
        return tuple(zone.d_hi_m for zone in self.zones[:-1])

    def snapshot(self) -> dict:
        return {
            "family": self.family,
            "ais_weight": self.ais_weight,
            "zones": [
                {"d_lo_m": z.d_lo_m, "d_hi_m": z.d_hi_m, "weights": dict(z.weights)} for z in self.zones
            ],
        }


def _weight_spec(assessment: WeatherAssessment, network: WeatherStateNetwork) -> WeightSpec:
    parts = [(network.template(name), w) for name, w in assessment.matched]
    if len(parts) == 1:
        return parts[0][0].weights
    return blend_weight_specs(parts)


def build_weights(
    assessment: WeatherAssessment,
    network: WeatherStateNetwork,
    vis_m: float,
    vis_ir_m: float,
    radar_r_min_m: float = DEFAULT_RADAR_SHADOW_M,
) -> WeightProfile:
    """
    Range-zoned fusion weights for the assessed weather

    Haze-family templates get a near zone up to min(500 m, vis/2) where the visible camera
    leads, a mid zone up to the IR visibility where IR leads, and radar beyond. Clear-family
    templates split at the radar shadow edge.

    Args:
        assessment: Current weather assessment
        network: Network holding the matched templates
        vis_m: Measured visibility in meters
        vis_ir_m: Effective IR visibility in meters
        radar_r_min_m: Inner edge of the radar coverage

    Returns:
        WeightProfile

    Raises:
        DomainError: vis_m <= 0
    """
    if vis_m <= 0:
        raise DomainError(f"visibility must be > 0, got {vis_m}")
    spec = _weight_spec(assessment, network)

    if spec.family == "clear":
        zones = (
            Zone(0.0, radar_r_min_m, dict(spec.near)),
            Zone(radar_r_min_m, math.inf, dict(spec.far)),
        )
        return WeightProfile(zones, family="clear")

    z1 = min(NEAR_FIELD_CAP_M, vis_m / 2.0)
    z2 = max(vis_ir_m, z1)
    zones = [Zone(0.0, z1, dict(spec.near))]
    if z2 > z1:
        zones.append(Zone(z1, z2, dict(spec.mid)))
    zones.append(Zone(z2, math.inf, dict(spec.far)))
    return WeightProfile(tuple(zones), family="haze")


def sensor_settings(assessment: WeatherAssessment, network: WeatherStateNetwork) -> SettingsDirective:
    """Settings of the highest-weight matched template"""
    return network.template(assessment.primary).settings


def boundaries_shifted(old: WeightProfile, new: WeightProfile, tolerance: float = ZONE_SHIFT_TOLERANCE) -> bool:
    """True when the zone layout changed or any finite boundary moved by more than `tolerance`"""
    if old.family != new.family or len(old.boundaries) != len(new.boundaries):
        return True
    for a, b in zip(old.boundaries, new.boundaries):
        if abs(b - a) > tolerance * max(abs(a), 1e-9):
            return True
    return False


class SensorManager:
    """
    Owns the sensor histories and the schedule, weights and settings in force

    apply() rebuilds what the new assessment changes and reports which parts changed,
    so the caller can log each change once.
    """

    def __init__(
        self,
        network: WeatherStateNetwork,
        history_capacity: int = DEFAULT_CAPACITY,
        radar_r_min_m: float = DEFAULT_RADAR_SHADOW_M,
    ):
        self.logger = logging.getLogger(__name__)
        self.network = network
        self.radar_r_min_m = radar_r_min_m
        self.histories: Dict[str, HistoryBuffer] = {
            channel: HistoryBuffer(history_capacity) for channel in SENSOR_CHANNELS.values()
        }
        self.schedule: Optional[SensorSchedule] = None
        self.weights: Optional[WeightProfile] = None
        self.settings: Optional[SettingsDirective] = None
        self.assessment: Optional[WeatherAssessment] = None

    def due(self, t_s: float) -> List[str]:
        return due_sensors(self.schedule, t_s) if self.schedule is not None else []

    def record(self, t_s: float, readings: Mapping[str, float]) -> None:
        """Store readings keyed by channel and mark their sensors polled"""
        channel_sensor = {channel: sensor for sensor, channel in SENSOR_CHANNELS.items()}
        for channel, value in readings.items():
            self.histories[channel].push(t_s, value)
            if self.schedule is not None:
                mark_polled(self.schedule, channel_sensor[channel], t_s)

    def latest(self) -> Dict[str, float]:
        """Most recent reading per channel"""
        return {c: buf.last[1] for c, buf in self.histories.items() if buf.last is not None}

    def apply(
        self,
        assessment: WeatherAssessment,
        t_s: float,
        vis_m: float,
        vis_ir_m: float,
    ) -> Dict[str, bool]:
        """
        Adopt a new weather assessment

        Args:
            assessment: Latest assessment
            t_s: Current time
            vis_m: Measured visibility
            vis_ir_m: Measured IR visibility

        Returns:
            Flags {'schedule', 'weights', 'settings'} telling which outputs changed
        """
        template_changed = self.assessment is None or self.assessment.matched != assessment.matched
        self.assessment = assessment
        changed = {"schedule": False, "weights": False, "settings": False}

        if template_changed or self.schedule is None:
            schedule = build_schedule(assessment, self.network, self.schedule, t_s)
            changed["schedule"] = self.schedule is None or schedule.period_s != self.schedule.period_s
            self.schedule = schedule

        weights = build_weights(assessment, self.network, vis_m, vis_ir_m, self.radar_r_min_m)
        rebuild = (
            self.weights is None
            or (template_changed and weights != self.weights)
            or boundaries_shifted(self.weights, weights)
        )
        if rebuild:
            changed["weights"] = True
            self.weights = weights

        settings = sensor_settings(assessment, self.network)
        if self.settings is None or settings != self.settings:
            changed["settings"] = True
            self.settings = settings

        if template_changed:
            self.logger.info(
                f"Sensor management switched to {assessment.primary} at t={t_s:g}: "
                f"aerosol every {self.schedule.period_s.get('aerosol', float('nan')):g} s"
            )
        return changed
