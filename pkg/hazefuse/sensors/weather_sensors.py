"""
Local weather and geo sensors for hazefuse
"""
from typing import Dict, Iterable, Optional

import numpy as np

from hazefuse.core.scenario import WEATHER_CHANNELS
from hazefuse.core.world import WeatherSample
from hazefuse.sensors.types import WeatherNoiseConfig

# polled sensor name -> feature channel it measures
SENSOR_CHANNELS = {
    "aerosol": "psi",
    "rain": "rain_mmph",
    "wind": "wind_mps",
    "humidity": "humidity_pct",
    "luminance": "luminance_lux",
}
WEATHER_SENSORS = ("humidity", "aerosol", "rain", "wind", "luminance")


def _clamp(channel: str, value: float) -> float:
    value = max(0.0, value)
    if channel == "humidity_pct":
        value = min(100.0, value)
    return value


def weather_sensors_read(
    sample: WeatherSample,
    noise_cfg: WeatherNoiseConfig,
    rng: np.random.Generator,
    channels: Optional[Iterable[str]] = None,
) -> Dict[str, float]:
    """
    Noisy local weather readings

    Args:
        sample: True weather at the sensor
        noise_cfg: Per-channel absolute noise std
        rng: Sensor substream
        channels: Channels to read (default all, in canonical order)

    Returns:
        Mapping channel -> reading, truth plus Gaussian noise, clamped to the physical range
    """
    wanted = set(channels) if channels is not None else set(WEATHER_CHANNELS)
    readings = {}
    for channel in WEATHER_CHANNELS:
        if channel not in wanted:
            continue
        noise = float(rng.normal(0.0, noise_cfg.std(channel)))
        readings[channel] = _clamp(channel, sample.value(channel) + noise)
    return readings
