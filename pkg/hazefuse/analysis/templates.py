"""
Weather templates for hazefuse
A template is a learned weather situation: feature statistics plus the sensor schedule,
fusion weights and sensor settings recommended when it is detected
"""
import math
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hazefuse.analysis.features import SIGMA_FLOOR, WeatherFeatureVector, rms_z_distance
from hazefuse.core.scenario import WEATHER_CHANNELS

WEIGHTED_SOURCES = ("eo_vis", "eo_ir", "radar")
ZONES = ("near", "mid", "far")
PERIOD_EPS = 1e-9


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WeightSpec(_Model):
    """Per-zone source weights stored with a template; 'clear' profiles use near and far only"""
    family: Literal["haze", "clear"]
    near: Dict[str, float]
    mid: Dict[str, float]
    far: Dict[str, float]

    @model_validator(mode="after")
    def _check(self):
        for zone in ZONES:
            weights = getattr(self, zone)
            if set(weights) != set(WEIGHTED_SOURCES):
                raise ValueError(f"{zone} weights must cover {', '.join(WEIGHTED_SOURCES)}")
            if any(not 0.0 <= w <= 1.0 for w in weights.values()):
                raise ValueError(f"{zone} weights must lie in [0, 1]")
            if abs(sum(weights.values()) - 1.0) > 1e-9:
                raise ValueError(f"{zone} weights must sum to 1")
        return self


class EOSettings(_Model):
    dynamic_range: Literal["small", "large"] = "large"
    focus: Literal["close", "long"] = "long"
    gain: float = Field(default=1.0, gt=0)
    gamma: float = Field(default=1.0, gt=0)
    color_mode: Literal["vivid", "normal"] = "normal"


class SettingsDirective(_Model):
    """Imaging sensor settings prescribed for a weather situation"""
    eo_vis: EOSettings = Field(default_factory=EOSettings)
    eo_ir: EOSettings = Field(default_factory=EOSettings)
    radar_calibration: str = "default"


class WeatherTemplate(_Model):
    """One weather situation in the dictionary"""
    name: str = Field(min_length=1)
    mu: Dict[str, float]
    sigma: Dict[str, float]
    count: int = Field(default=1, ge=1)
    last_used_t: Optional[float] = None
    last_updated_t: Optional[float] = None
    schedule: Dict[str, float]
    weights: WeightSpec
    settings: SettingsDirective = Field(default_factory=SettingsDirective)
    event_links: List[str] = Field(default_factory=list)
    provisional: bool = False

    @field_validator("mu", "sigma")
    @classmethod
    def _cover_channels(cls, value: Dict[str, float]) -> Dict[str, float]:
        if set(value) != set(WEATHER_CHANNELS):
            raise ValueError(f"must cover channels {', '.join(WEATHER_CHANNELS)}")
        return value

    @field_validator("sigma")
    @classmethod
    def _positive_sigma(cls, value: Dict[str, float]) -> Dict[str, float]:
        if any(s <= 0 for s in value.values()):
            raise ValueError("sigma components must be > 0")
        return value

    @field_validator("schedule")
    @classmethod
    def _positive_periods(cls, value: Dict[str, float]) -> Dict[str, float]:
        if any(p <= 0 for p in value.values()):
            raise ValueError("schedule periods must be > 0")
        return value

    def mu_array(self) -> np.ndarray:
        return np.asarray([self.mu[c] for c in WEATHER_CHANNELS], dtype=float)

    def sigma_array(self) -> np.ndarray:
        return np.asarray([self.sigma[c] for c in WEATHER_CHANNELS], dtype=float)

    def set_statistics(self, mu: Sequence[float], sigma: Sequence[float]) -> None:
        self.mu = {c: float(v) for c, v in zip(WEATHER_CHANNELS, mu)}
        self.sigma = {c: float(v) for c, v in zip(WEATHER_CHANNELS, sigma)}


def template_distance(f: WeatherFeatureVector, tpl: WeatherTemplate) -> float:
    """RMS of per-channel z-scores of f against the template"""
    return rms_z_distance(f.as_array(), tpl.mu_array(), tpl.sigma_array())


def sigma_floor_array() -> np.ndarray:
    return np.asarray([SIGMA_FLOOR[c] for c in WEATHER_CHANNELS], dtype=float)


def dominant(parts: Sequence[Tuple[str, float]]) -> str:
    """Highest-weight name; ties go to the alphabetically first"""
    return min(parts, key=lambda item: (-item[1], item[0]))[0]


def blend_schedules(parts: Sequence[Tuple[WeatherTemplate, float]]) -> Dict[str, float]:
    """Weight-blended polling periods rounded up to whole seconds"""
    sensors = sorted(set().union(*(tpl.schedule for tpl, _ in parts)))
    blended = {}
    for sensor in sensors:
        total = sum(w * tpl.schedule[sensor] for tpl, w in parts if sensor in tpl.schedule)
        weight = sum(w for tpl, w in parts if sensor in tpl.schedule)
        blended[sensor] = float(max(1, math.ceil(total / weight - PERIOD_EPS)))
    return blended


def blend_weight_specs(parts: Sequence[Tuple[WeatherTemplate, float]]) -> WeightSpec:
    """Blend zone weights by template weight; the family follows the dominant template"""
    leader = dominant([(tpl.name, w) for tpl, w in parts])
    family = next(tpl.weights.family for tpl, _ in parts if tpl.name == leader)
    zones = {}
    for zone in ZONES:
        mixed = {s: sum(w * getattr(tpl.weights, zone)[s] for tpl, w in parts) for s in WEIGHTED_SOURCES}
        total = sum(mixed.values())
        zones[zone] = {s: v / total for s, v in mixed.items()}
    return WeightSpec(family=family, **zones)
