"""
Sensor data types and configuration for hazefuse
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

from hazefuse.core.exceptions import ValidationError


class Source(str, Enum):
    """Detection sources; declaration order is the association tie-break order"""
    RADAR = "radar"
    EO_IR = "eo_ir"
    EO_VIS = "eo_vis"
    AIS = "ais"
    SONAR = "sonar"


SOURCE_ORDER = {source.value: rank for rank, source in enumerate(Source)}
IMAGING_SOURCES = ("radar", "sonar", "eo_vis", "eo_ir")
EO_SOURCES = frozenset({"eo_vis", "eo_ir"})


@dataclass(frozen=True)
class Detection:
    """One sensor's report of one object, in world coordinates"""
    source: str
    t_s: float
    det_id: int
    position_m: Tuple[float, float]
    velocity_mps: Optional[Tuple[float, float]] = None
    object_hint: Optional[str] = None
    size_class_estimate: Optional[str] = None
    confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if self.source == Source.AIS.value and (self.object_hint is None or self.velocity_mps is None):
            raise ValueError("AIS detections need object_hint and velocity")

    @property
    def key(self) -> Tuple[int, int]:
        """Deterministic ordering key (source order, det_id)"""
        return SOURCE_ORDER[self.source], self.det_id


@dataclass(frozen=True)
class WeatherAnnex:
    """Weather readings appended to an AIS message"""
    psi: float
    rain_mmph: float
    wind_mps: float
    humidity_pct: float
    luminance_lux: float


@dataclass(frozen=True)
class AISMessage:
    """AIS position report, optionally with a weather annex"""
    sender_id: str
    t_s: float
    position_m: Tuple[float, float]
    velocity_mps: Tuple[float, float]
    heading_rad: float
    weather_annex: Optional[WeatherAnnex] = None
    is_station: bool = False

    def to_detection(self, det_id: int) -> Detection:
        return Detection(
            source=Source.AIS.value,
            t_s=self.t_s,
            det_id=det_id,
            position_m=self.position_m,
            velocity_mps=self.velocity_mps,
            object_hint=self.sender_id,
            confidence=1.0,
        )


def _default_p_det() -> Dict[str, float]:
    return {"large": 0.99, "medium": 0.9, "small": 0.3}


@dataclass
class RadarConfig:
    r_min_m: float = 2000.0
    r_max_m: float = 200000.0
    sigma_pos_m: float = 5.0
    p_det: Dict[str, float] = field(default_factory=_default_p_det)


@dataclass
class SonarConfig:
    r_max_m: float = 1000.0
    sigma_pos_m: float = 10.0
    submerged_only: bool = True
    p_det: float = 0.9


@dataclass
class EOConfig:
    hw_range_m: float = 12000.0
    epsilon_contrast: float = 0.05
    alpha_ir: float = 0.4


@dataclass
class WeatherNoiseConfig:
    """Absolute per-channel noise std of the local weather sensors"""
    psi: float = 5.0
    rain_mmph: float = 0.2
    wind_mps: float = 0.3
    humidity_pct: float = 1.0
    luminance_lux: float = 50.0

    def std(self, channel: str) -> float:
        return float(getattr(self, channel))


@dataclass
class SensorConfig:
    """All simulated sensor parameters"""
    radar: RadarConfig = field(default_factory=RadarConfig)
    sonar: SonarConfig = field(default_factory=SonarConfig)
    eo: EOConfig = field(default_factory=EOConfig)
    weather_sensor_noise: WeatherNoiseConfig = field(default_factory=WeatherNoiseConfig)

    def __post_init__(self):
        problems = []
        if not self.radar.r_min_m < self.radar.r_max_m:
            problems.append("radar r_min_m must be below r_max_m")
        if not 0.0 < self.eo.epsilon_contrast < 1.0:
            problems.append("epsilon_contrast must lie in (0, 1)")
        if not 0.0 < self.eo.alpha_ir <= 1.0:
            problems.append("alpha_ir must lie in (0, 1]")
        if any(not 0.0 <= p <= 1.0 for p in self.radar.p_det.values()) or not 0.0 <= self.sonar.p_det <= 1.0:
            problems.append("detection probabilities must lie in [0, 1]")
        if problems:
            raise ValidationError(problems[0], problems)
