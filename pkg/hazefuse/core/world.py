"""
Ground-truth world for hazefuse: vessel kinematics and the true weather field
Flat 2-D Cartesian frame in meters, x east, y north; bearings are clockwise from north
"""
import bisect
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from hazefuse.core.exceptions import EndOfScenario, OutOfRange
from hazefuse.core.scenario import (
    WEATHER_CHANNELS,
    Scenario,
    VesselSpec,
    WeatherSegment,
)

TIME_EPS = 1e-9


def compass_bearing(dx: float, dy: float) -> float:
    """Bearing of (dx, dy) in radians, 0 = north, clockwise, in [0, 2*pi)"""
    return math.atan2(dx, dy) % (2.0 * math.pi)


@dataclass(frozen=True)
class ObjectState:
    """Snapshot of one vessel or obstacle"""
    id: str
    position_m: Tuple[float, float]
    velocity_mps: Tuple[float, float]
    heading_rad: float
    size_class: str
    contrast: float
    ais_equipped: bool = False
    submerged: bool = False
    kind: str = "vessel"

    @property
    def speed_mps(self) -> float:
        return math.hypot(*self.velocity_mps)

    def range_to(self, point: Tuple[float, float]) -> float:
        return math.hypot(self.position_m[0] - point[0], self.position_m[1] - point[1])


@dataclass(frozen=True)
class WeatherSample:
    """Weather values at one point and time"""
    psi: float
    rain_mmph: float
    wind_mps: float
    humidity_pct: float
    luminance_lux: float
    label: str = ""

    def value(self, channel: str) -> float:
        return float(getattr(self, channel))

    def as_dict(self) -> Dict[str, float]:
        return {channel: self.value(channel) for channel in WEATHER_CHANNELS}


@dataclass(frozen=True)
class WorldState:
    """Immutable ground-truth snapshot at t_s"""
    t_s: float
    amv_id: str
    vessel_states: Dict[str, ObjectState]
    obstacle_states: Dict[str, ObjectState]
    active_weather: WeatherSegment

    @property
    def own(self) -> ObjectState:
        return self.vessel_states[self.amv_id]

    def surface_targets(self) -> List[ObjectState]:
        """Other vessels plus surface obstacles, ordered by id"""
        targets = [s for vid, s in self.vessel_states.items() if vid != self.amv_id]
        targets += [s for s in self.obstacle_states.values() if not s.submerged]
        return sorted(targets, key=lambda s: s.id)

    def submerged_targets(self) -> List[ObjectState]:
        return sorted((s for s in self.obstacle_states.values() if s.submerged), key=lambda s: s.id)

    def all_targets(self) -> List[ObjectState]:
        return sorted(self.surface_targets() + self.submerged_targets(), key=lambda s: s.id)


def _active_leg_index(spec: VesselSpec, t_s: float) -> int:
    starts = [leg.start_time_s for leg in spec.legs]
    return max(0, bisect.bisect_right(starts, t_s + TIME_EPS) - 1)


def _heading(velocity: np.ndarray, previous: float) -> float:
    if float(np.hypot(*velocity)) > 0.0:
        return compass_bearing(float(velocity[0]), float(velocity[1]))
    return previous


def _advance(spec: VesselSpec, position: Tuple[float, float], t0: float, t1: float) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate constant-velocity legs from t0 to t1, crossing any leg boundaries in between"""
    pos = np.asarray(position, dtype=float)
    t = t0
    for leg in spec.legs:
        if t0 + TIME_EPS < leg.start_time_s <= t1 + TIME_EPS:
            velocity = np.asarray(spec.legs[_active_leg_index(spec, t)].velocity_mps, dtype=float)
            pos = pos + velocity * (leg.start_time_s - t)
            t = leg.start_time_s
            if leg.position_m is not None:
                pos = np.asarray(leg.position_m, dtype=float)
    velocity = np.asarray(spec.legs[_active_leg_index(spec, t)].velocity_mps, dtype=float)
    pos = pos + velocity * (t1 - t)
    return pos, velocity


def _vessel_state(spec: VesselSpec, position: np.ndarray, velocity: np.ndarray, heading: float) -> ObjectState:
    return ObjectState(
        id=spec.id,
        position_m=(float(position[0]), float(position[1])),
        velocity_mps=(float(velocity[0]), float(velocity[1])),
        heading_rad=heading,
        size_class=spec.size_class,
        contrast=spec.contrast,
        ais_equipped=spec.ais_equipped,
    )


def segment_at(scenario: Scenario, t_s: float) -> WeatherSegment:
    """Weather segment active at t_s; boundaries belong to the later segment"""
    segments = scenario.segments
    starts = [s.t_start_s for s in segments]
    index = max(0, bisect.bisect_right(starts, t_s + TIME_EPS) - 1)
    return segments[index]


def initial_state(scenario: Scenario) -> WorldState:
    """World snapshot at t=0"""
    vessels = {}
    for spec in scenario.all_vessels:
        first = spec.legs[0]
        velocity = np.asarray(first.velocity_mps, dtype=float)
        vessels[spec.id] = _vessel_state(spec, np.asarray(first.position_m, dtype=float), velocity, _heading(velocity, 0.0))
    obstacles = {
        o.id: ObjectState(
            id=o.id,
            position_m=(float(o.position_m[0]), float(o.position_m[1])),
            velocity_mps=(0.0, 0.0),
            heading_rad=0.0,
            size_class=o.size_class,
            contrast=o.contrast,
            submerged=o.submerged,
            kind="obstacle",
        )
        for o in scenario.obstacles
    }
    return WorldState(
        t_s=0.0,
        amv_id=scenario.amv.id,
        vessel_states=vessels,
        obstacle_states=obstacles,
        active_weather=segment_at(scenario, 0.0),
    )


def step_world(state: WorldState, scenario: Scenario) -> WorldState:
    """
    Advance the world by one dt

    Args:
        state: Current snapshot
        scenario: Scenario the snapshot belongs to

    Returns:
        Snapshot at state.t_s + dt_s

    Raises:
        EndOfScenario: the step would pass duration_s
    """
    t_next = round(state.t_s + scenario.dt_s, 9)
    if t_next > scenario.duration_s + TIME_EPS:
        raise EndOfScenario(f"cannot step past duration {scenario.duration_s:g} s (t={state.t_s:g})")

    vessels = {}
    for spec in scenario.all_vessels:
        previous = state.vessel_states[spec.id]
        position, velocity = _advance(spec, previous.position_m, state.t_s, t_next)
        vessels[spec.id] = _vessel_state(spec, position, velocity, _heading(velocity, previous.heading_rad))

    return WorldState(
        t_s=t_next,
        amv_id=state.amv_id,
        vessel_states=vessels,
        obstacle_states=state.obstacle_states,
        active_weather=segment_at(scenario, t_next),
    )


def true_weather_at(scenario: Scenario, position_m: Tuple[float, float], t_s: float) -> WeatherSample:
    """
    Sample the true weather field

    Args:
        scenario: Scenario holding the weather timeline
        position_m: Query point in meters
        t_s: Query time in seconds

    Returns:
        Segment values at t_s plus the segment's linear gradients evaluated at position_m

    Raises:
        OutOfRange: t_s outside [0, duration_s]
    """
    if t_s < -TIME_EPS or t_s > scenario.duration_s + TIME_EPS:
        raise OutOfRange(f"t={t_s:g} outside [0, {scenario.duration_s:g}]")

    segment = segment_at(scenario, t_s)
    x_km, y_km = position_m[0] / 1000.0, position_m[1] / 1000.0
    values = {}
    for channel in WEATHER_CHANNELS:
        gx, gy = segment.gradient_per_km.get(channel, (0.0, 0.0))
        value = max(0.0, segment.value(channel) + gx * x_km + gy * y_km)
        if channel == "humidity_pct":
            value = min(100.0, value)
        values[channel] = value
    return WeatherSample(label=segment.label, **values)


class WorldSimulator:
    """Single-writer driver that walks a scenario tick by tick"""

    def __init__(self, scenario: Scenario):
        self.logger = logging.getLogger(__name__)
        self.scenario = scenario
        self.state: Optional[WorldState] = None

    @property
    def tick_count(self) -> int:
        return int(math.floor(self.scenario.duration_s / self.scenario.dt_s + TIME_EPS)) + 1

    def states(self) -> Iterator[WorldState]:
        """Yield every snapshot from t=0 to the last tick within duration"""
        self.state = initial_state(self.scenario)
        yield self.state
        for _ in range(self.tick_count - 1):
            self.state = step_world(self.state, self.scenario)
            yield self.state
        self.logger.debug(f"World replay finished at t={self.state.t_s:g} s")
