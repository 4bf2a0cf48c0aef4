"""
Scenario schema and loading for hazefuse
Scenario files are JSON documents; unknown keys are rejected so runs stay reproducible
"""
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from hazefuse.core.exceptions import ParseError, ValidationError
from hazefuse.utils.file_io import JsonLoader

logger = logging.getLogger(__name__)

Vec2 = Tuple[float, float]

SIZE_CLASSES = ("small", "medium", "large")
DEFAULT_CONTRAST = {"small": 0.4, "medium": 0.7, "large": 1.0}
WEATHER_CHANNELS = ("psi", "rain_mmph", "wind_mps", "humidity_pct", "luminance_lux")


def size_class_for_extent(extent_m: float) -> str:
    """Size class of a fixed obstacle from its extent"""
    if extent_m >= 100.0:
        return "large"
    if extent_m >= 20.0:
        return "medium"
    return "small"


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Leg(_StrictModel):
    """Constant-velocity leg starting at start_time_s"""
    start_time_s: float = Field(ge=0)
    position_m: Optional[Vec2] = None
    velocity_mps: Vec2 = (0.0, 0.0)


class VesselSpec(_StrictModel):
    """Vessel definition: identity, size, AIS fit and piecewise kinematics"""
    id: str = Field(min_length=1)
    size_class: Literal["small", "medium", "large"] = "medium"
    ais_equipped: bool = True
    weather_annex: bool = True
    legs: List[Leg] = Field(min_length=1)
    contrast: float = Field(gt=0, le=1)

    @model_validator(mode="before")
    @classmethod
    def _default_contrast(cls, data):
        if isinstance(data, dict) and data.get("contrast") is None:
            data = dict(data)
            data["contrast"] = DEFAULT_CONTRAST.get(data.get("size_class", "medium"), 0.7)
        return data

    @model_validator(mode="after")
    def _check_legs(self):
        problems = []
        first = self.legs[0]
        if first.start_time_s != 0:
            problems.append("first leg must start at t=0")
        if first.position_m is None:
            problems.append("first leg needs position_m")
        starts = [leg.start_time_s for leg in self.legs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            problems.append("legs not ordered by start_time")
        if problems:
            raise ValueError("\n".join(problems))
        return self


class ObstacleSpec(_StrictModel):
    """Fixed surface structure or submerged obstacle"""
    id: str = Field(min_length=1)
    position_m: Vec2
    extent_m: float = Field(default=10.0, ge=0)
    submerged: bool = False

    @property
    def size_class(self) -> str:
        return size_class_for_extent(self.extent_m)

    @property
    def contrast(self) -> float:
        return DEFAULT_CONTRAST[self.size_class]


class WeatherSegment(_StrictModel):
    """Piecewise-constant weather over [t_start_s, t_end_s) with optional linear spatial gradients"""
    t_start_s: float = Field(ge=0)
    t_end_s: float = Field(ge=0)
    psi: float = Field(ge=0)
    rain_mmph: float = Field(default=0.0, ge=0)
    wind_mps: float = Field(default=0.0, ge=0)
    humidity_pct: float = Field(default=50.0, ge=0, le=100)
    luminance_lux: float = Field(default=50000.0, ge=0)
    label: str
    gradient_per_km: Dict[str, Vec2] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_segment(self):
        problems = []
        if self.t_end_s <= self.t_start_s:
            problems.append("segment t_end_s must exceed t_start_s")
        unknown = sorted(set(self.gradient_per_km) - set(WEATHER_CHANNELS))
        if unknown:
            problems.append(f"unknown gradient channel: {', '.join(unknown)}")
        if problems:
            raise ValueError("\n".join(problems))
        return self

    def value(self, channel: str) -> float:
        return float(getattr(self, channel))


class RemoteStation(_StrictModel):
    """Shore or buoy station broadcasting a weather annex over AIS"""
    id: str = Field(min_length=1)
    position_m: Vec2
    weather_annex: bool = True


class Scenario(_StrictModel):
    """Complete scenario definition"""
    duration_s: float = Field(gt=0)
    dt_s: float = Field(default=1.0, gt=0)
    seed: int = Field(ge=0)
    amv: VesselSpec
    vessels: List[VesselSpec]
    obstacles: List[ObstacleSpec]
    weather_timeline: List[WeatherSegment] = Field(min_length=1)
    remote_stations: List[RemoteStation]

    @model_validator(mode="after")
    def _check_invariants(self):
        problems = scenario_diagnostics(self)
        if problems:
            raise ValueError("\n".join(problems))
        return self

    @property
    def segments(self) -> List[WeatherSegment]:
        """Weather segments in time order"""
        return sorted(self.weather_timeline, key=lambda s: s.t_start_s)

    @property
    def all_vessels(self) -> List[VesselSpec]:
        return [self.amv, *self.vessels]

    def with_seed(self, seed: int) -> "Scenario":
        return self.model_copy(update={"seed": int(seed)})


def scenario_diagnostics(scenario: Scenario) -> List[str]:
    """
    Cross-field invariants of a scenario

    Args:
        scenario: Scenario whose fields already passed type validation

    Returns:
        List of violated invariants, first violation first
    """
    problems = []

    seen = set()
    ids = [v.id for v in scenario.all_vessels]
    ids += [o.id for o in scenario.obstacles]
    ids += [s.id for s in scenario.remote_stations]
    for object_id in ids:
        if object_id in seen:
            problems.append(f"duplicate id: {object_id}")
        seen.add(object_id)

    segments = scenario.segments
    if segments[0].t_start_s != 0:
        problems.append("weather_timeline does not start at 0")
    for previous, current in zip(segments, segments[1:]):
        if current.t_start_s < previous.t_end_s:
            problems.append(f"weather_timeline overlap at t={current.t_start_s:g}")
        elif current.t_start_s > previous.t_end_s:
            problems.append(f"weather_timeline gap at t={previous.t_end_s:g}")
    if segments[-1].t_end_s < scenario.duration_s:
        problems.append("weather_timeline does not cover duration_s")

    return problems


def _format_pydantic_errors(error: PydanticValidationError) -> List[str]:
    diagnostics = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        if item["type"] == "extra_forbidden":
            lines = ["unknown key"]
        elif item["type"] == "missing":
            lines = ["missing key"]
        else:
            lines = str(item["msg"]).removeprefix("Value error, ").split("\n")
        for line in lines:
            diagnostics.append(f"{location}: {line}" if location else line)
    return diagnostics


def parse_scenario(document) -> Scenario:
    """
    Validate an already-parsed scenario document

    Raises:
        ValidationError: names the first violated invariant; all are in .diagnostics
    """
    if not isinstance(document, dict):
        raise ValidationError("scenario must be a JSON object")
    try:
        return Scenario.model_validate(document)
    except PydanticValidationError as e:
        diagnostics = _format_pydantic_errors(e)
        raise ValidationError(diagnostics[0], diagnostics) from e


def load_scenario(path: Path) -> Scenario:
    """
    Load and validate a scenario file

    Args:
        path: Path to the scenario JSON file

    Returns:
        Validated Scenario

    Raises:
        ParseError: malformed JSON
        ValidationError: invariant violated
    """
    document = JsonLoader().load(Path(path))
    scenario = parse_scenario(document)
    logger.info(
        f"Loaded scenario {Path(path).name}: {len(scenario.vessels)} vessels, "
        f"{len(scenario.obstacles)} obstacles, {len(scenario.weather_timeline)} weather segments"
    )
    return scenario


def validate_scenario(path: Path) -> List[str]:
    """
    Run every scenario check and collect diagnostics

    Args:
        path: Path to the scenario JSON file

    Returns:
        Diagnostics list; empty means valid
    """
    try:
        load_scenario(path)
    except ValidationError as e:
        return list(e.diagnostics)
    except ParseError as e:
        return [str(e)]
    return []
