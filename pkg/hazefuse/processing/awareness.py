"""
Situational awareness for hazefuse

Spatial weather picture from remote weather annexes, need-to-learn scoring and the
ledger of notable events that feeds it.
"""
import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from hazefuse.analysis.weather_network import THETA_NEW, WeatherAssessment
from hazefuse.processing.fusion import FusedObject
from hazefuse.processing.risk import RiskAssessment

logger = logging.getLogger(__name__)

N_BEARINGS = 16
RING_RADII_M = (5000.0, 10000.0, 15000.0, 20000.0)
IDW_POWER = 2.0
IDW_EPS_M = 1.0
TIE_TOLERANCE = 1e-12

RARE_EVENT_HORIZON_S = 3600.0
RARE_EVENT_COUNT = 3
VISIBILITY_DROP_FRACTION = 0.5
STORM_WARNING_PROBABILITY = 0.5

EVENT_KINDS = ("weather_change", "novel_weather", "visibility_drop", "collision_threat", "storm_warning")

Vec2 = Tuple[float, float]


def severity(readings: Mapping[str, float]) -> float:
    """Normalized weather severity: psi/230 + rain/10 + wind/20, each term clipped to [0, 1]"""
    terms = (
        readings.get("psi", 0.0) / 230.0,
        readings.get("rain_mmph", 0.0) / 10.0,
        readings.get("wind_mps", 0.0) / 20.0,
    )
    return float(sum(np.clip(terms, 0.0, 1.0)))


@dataclass(frozen=True)
class WeatherPicture:
    """Local weather state, its forecast and the spatial severity field around the own ship"""
    assessment: WeatherAssessment
    forecast: Dict[str, float]
    forecast_6: Dict[str, float] = field(default_factory=dict)
    severity_by_bearing: Optional[Tuple[float, ...]] = None
    pocket_bearing_rad: Optional[float] = None
    haze_bearing_rad: Optional[float] = None
    local_severity: Optional[float] = None

    def summary(self) -> dict:
        return {
            "template": self.assessment.primary,
            "matched": [list(m) for m in self.assessment.matched],
            "novel": self.assessment.novel,
            "forecast": self.forecast,
            "forecast_6": self.forecast_6,
            "severity_by_bearing": list(self.severity_by_bearing) if self.severity_by_bearing is not None else None,
            "pocket_bearing_rad": self.pocket_bearing_rad,
            "haze_bearing_rad": self.haze_bearing_rad,
            "local_severity": self.local_severity,
        }


def _pick(values: np.ndarray, lowest: bool) -> int:
    target = values.min() if lowest else values.max()
    return int(np.flatnonzero(np.abs(values - target) <= TIE_TOLERANCE)[0])


def grid_points(own_pos: Vec2, n_bearings: int = N_BEARINGS, radii: Sequence[float] = RING_RADII_M) -> np.ndarray:
    """Grid of shape (n_bearings, len(radii), 2) on compass rays from the own ship"""
    bearings = 2.0 * np.pi * np.arange(n_bearings) / n_bearings
    r = np.asarray(radii, dtype=float)
    x = own_pos[0] + np.sin(bearings)[:, None] * r[None, :]
    y = own_pos[1] + np.cos(bearings)[:, None] * r[None, :]
    return np.stack([x, y], axis=-1)


def weather_awareness(
    local: WeatherAssessment,
    remote: Sequence[Tuple[Vec2, Mapping[str, float]]],
    forecast: Mapping[str, float],
    own_pos: Vec2 = (0.0, 0.0),
    forecast_6: Optional[Mapping[str, float]] = None,
    local_readings: Optional[Mapping[str, float]] = None,
    n_bearings: int = N_BEARINGS,
    radii: Sequence[float] = RING_RADII_M,
) -> WeatherPicture:
    """
    Build the weather picture around the own ship

    Remote severities are spread over a polar grid by inverse-distance weighting. The
    pocket is the ray of least mean severity and the haze source the ray of greatest;
    ties go to the lowest bearing index.

    Args:
        local: Local weather assessment
        remote: (position, readings) of each remote weather annex
        forecast: One-step forecast distribution
        own_pos: Own-ship position
        forecast_6: Six-step forecast distribution
        local_readings: Latest local readings, for local_severity
        n_bearings: Rays on the grid
        radii: Ring radii in meters

    Returns:
        WeatherPicture; the spatial fields are None without remote reports
    """
    local_severity = severity(local_readings) if local_readings else None
    picture = dict(
        assessment=local,
        forecast=dict(forecast),
        forecast_6=dict(forecast_6 or {}),
        local_severity=local_severity,
    )
    if not remote:
        return WeatherPicture(**picture)

    grid = grid_points(own_pos, n_bearings, radii)
    flat = grid.reshape(-1, 2)
    stations = np.asarray([pos for pos, _ in remote], dtype=float)
    values = np.asarray([severity(readings) for _, readings in remote])
    weights = 1.0 / (cdist(flat, stations) + IDW_EPS_M) ** IDW_POWER
    field_values = (weights @ values) / weights.sum(axis=1)
    by_bearing = field_values.reshape(n_bearings, len(radii)).mean(axis=1)

    step = 2.0 * math.pi / n_bearings
    return WeatherPicture(
        severity_by_bearing=tuple(float(v) for v in by_bearing),
        pocket_bearing_rad=_pick(by_bearing, lowest=True) * step,
        haze_bearing_rad=_pick(by_bearing, lowest=False) * step,
        **picture,
    )


def need_to_learn(
    assessment: WeatherAssessment,
    event_counts: Optional[Mapping[str, int]] = None,
    theta_new: float = THETA_NEW,
) -> float:
    """
    Need-to-learn score in [0, 1]

    0.7 * novelty + 0.3 * min(1, rare event rate), where novelty is 1 for a novel situation
    and distance / theta_new otherwise, and the rare rate is the share of recent events
    whose kind occurred fewer than three times.
    """
    novel_indicator = 1.0 if assessment.novel else assessment.distance / theta_new
    counts = event_counts or {}
    total = sum(counts.values())
    rare = sum(c for c in counts.values() if c < RARE_EVENT_COUNT)
    rare_rate = rare / max(1, total)
    score = 0.7 * novel_indicator + 0.3 * min(1.0, rare_rate)
    return float(min(1.0, max(0.0, score)))


class EventLedger:
    """Timestamped notable events kept over a sliding horizon"""

    def __init__(self, horizon_s: float = RARE_EVENT_HORIZON_S):
        self.logger = logging.getLogger(__name__)
        self.horizon_s = horizon_s
        self._events: Deque[Tuple[float, str]] = deque()

    def __len__(self) -> int:
        return len(self._events)

    def record(self, t_s: float, kind: str) -> None:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind '{kind}'")
        self._events.append((t_s, kind))
        self.logger.debug(f"event {kind} at t={t_s:g}")

    def counts(self, now_t: float) -> Dict[str, int]:
        """Event counts per kind within the horizon ending at now_t"""
        while self._events and self._events[0][0] < now_t - self.horizon_s:
            self._events.popleft()
        return dict(Counter(kind for t, kind in self._events if t <= now_t))


class AwarenessMonitor:
    """Turns successive weather and risk outputs into ledger events"""

    def __init__(self, ledger: Optional[EventLedger] = None):
        self.logger = logging.getLogger(__name__)
        self.ledger = ledger or EventLedger()
        self._last_template: Optional[str] = None
        self._last_visibility: Optional[float] = None
        self._alerted: Set[int] = set()

    def observe_weather(
        self,
        t_s: float,
        assessment: WeatherAssessment,
        visibility_m: float,
        forecast: Mapping[str, float],
    ) -> List[str]:
        """Register weather events for one evaluation and return their kinds"""
        events = []
        template = assessment.primary
        if self._last_template is not None and template != self._last_template:
            events.append("weather_change")
        if assessment.novel:
            events.append("novel_weather")
        if self._last_visibility is not None and visibility_m <= (1.0 - VISIBILITY_DROP_FRACTION) * self._last_visibility:
            events.append("visibility_drop")
        stormy_now = "storm" in template
        storm_p = sum(p for name, p in forecast.items() if "storm" in name)
        if not stormy_now and storm_p >= STORM_WARNING_PROBABILITY:
            events.append("storm_warning")
            self.logger.warning(f"Storm warning at t={t_s:g}: forecast probability {storm_p:.2f}")

        self._last_template = template
        self._last_visibility = visibility_m
        for kind in events:
            self.ledger.record(t_s, kind)
        return events

    def observe_risks(self, t_s: float, risks: Sequence[RiskAssessment]) -> List[int]:
        """Register a collision threat the first time each fid turns high; returns those fids"""
        fresh = [r.fid for r in risks if r.risk == "high" and r.fid not in self._alerted]
        for fid in fresh:
            self._alerted.add(fid)
            self.ledger.record(t_s, "collision_threat")
        return fresh


@dataclass(frozen=True)
class AwarenessReport:
    """Navigational, weather and need-to-learn awareness at one tick"""
    t_s: float
    fused: Tuple[FusedObject, ...]
    risks: Tuple[RiskAssessment, ...]
    weather: Optional[WeatherPicture]
    need_to_learn: float

    def __post_init__(self):
        if not 0.0 <= self.need_to_learn <= 1.0:
            raise ValueError("need_to_learn must lie in [0, 1]")

    @property
    def high_risk(self) -> List[int]:
        return [r.fid for r in self.risks if r.risk == "high"]
