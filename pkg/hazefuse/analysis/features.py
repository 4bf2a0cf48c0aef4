"""
Statistical weather features for hazefuse
Windowed channel means, template distances and running (Welford) statistics
"""
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from hazefuse.core.exceptions import EmptyWindow
from hazefuse.core.scenario import WEATHER_CHANNELS
from hazefuse.processing.history import HistoryBuffer

WINDOW_EPS = 1e-9

# lower bound on template sigma per channel; equals the default sensor noise std
SIGMA_FLOOR = {
    "psi": 5.0,
    "rain_mmph": 0.2,
    "wind_mps": 0.3,
    "humidity_pct": 1.0,
    "luminance_lux": 50.0,
}


@dataclass(frozen=True)
class WeatherFeatureVector:
    """Per-channel means over the recent history window"""
    values: Tuple[float, ...]
    t_s: float = 0.0

    def __post_init__(self):
        if len(self.values) != len(WEATHER_CHANNELS):
            raise ValueError(f"expected {len(WEATHER_CHANNELS)} channels, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("feature values must be finite")

    @classmethod
    def from_mapping(cls, values: Mapping[str, float], t_s: float = 0.0) -> "WeatherFeatureVector":
        return cls(tuple(float(values[c]) for c in WEATHER_CHANNELS), t_s)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(WEATHER_CHANNELS, self.values))

    def value(self, channel: str) -> float:
        return self.values[WEATHER_CHANNELS.index(channel)]


def extract_features(
    history: Mapping[str, HistoryBuffer],
    window_s: Union[float, Mapping[str, float]],
    t_s: Optional[float] = None,
    hold_last: bool = False,
) -> WeatherFeatureVector:
    """
    Arithmetic mean of each channel over [t - window_s, t]

    Args:
        history: Buffer per weather channel
        window_s: Window length, or one length per channel
        t_s: Evaluation time (default: latest sample across channels)
        hold_last: Use the latest sample of a channel whose window is empty instead of raising

    Returns:
        Feature vector at t_s

    Raises:
        EmptyWindow: a channel has no samples in its window and hold_last is off
    """
    if t_s is None:
        lasts = [b.last[0] for b in history.values() if b.last is not None]
        t_s = max(lasts) if lasts else 0.0

    means = {}
    for channel in WEATHER_CHANNELS:
        buffer = history.get(channel)
        width = window_s[channel] if isinstance(window_s, Mapping) else window_s
        values = buffer.window(t_s - width - WINDOW_EPS, t_s + WINDOW_EPS) if buffer is not None else []
        if not values and hold_last and buffer is not None and buffer.last is not None:
            values = [buffer.last[1]]
        if not values:
            raise EmptyWindow(channel)
        means[channel] = float(np.mean(values))
    return WeatherFeatureVector.from_mapping(means, t_s)


def z_scores(values: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    return (values - mu) / sigma


def rms_z_distance(values: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> float:
    """Root-mean-square of per-channel z-scores"""
    z = z_scores(values, mu, sigma)
    return float(np.sqrt(np.mean(z * z)))


def welford_update(
    mu: Sequence[float],
    sigma: Sequence[float],
    count: int,
    sample: Sequence[float],
    floor: Optional[Sequence[float]] = None,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Single-pass running mean/variance update

    The stored sigma is the sample standard deviation of `count` observations, so the
    sum of squared deviations is rebuilt as sigma**2 * (count - 1).

    Args:
        mu: Current means
        sigma: Current standard deviations
        count: Observations behind mu/sigma
        sample: New observation
        floor: Optional lower bound for the updated sigma

    Returns:
        (mu, sigma, count) after absorbing the sample
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    sample = np.asarray(sample, dtype=float)

    n = count + 1
    m2 = sigma ** 2 * max(count - 1, 0)
    delta = sample - mu
    mu_new = mu + delta / n
    m2 = m2 + delta * (sample - mu_new)
    sigma_new = np.sqrt(m2 / (n - 1))
    if floor is not None:
        sigma_new = np.maximum(sigma_new, np.asarray(floor, dtype=float))
    return mu_new, sigma_new, n
