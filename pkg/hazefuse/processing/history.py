"""
Bounded per-sensor history buffers
"""
from collections import deque
from typing import Deque, List, Optional, Tuple

from hazefuse.core.exceptions import NonMonotonicTimestamp

DEFAULT_CAPACITY = 600


class HistoryBuffer:
    """Ring of (t_s, value) samples with strictly increasing timestamps"""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._samples: Deque[Tuple[float, float]] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._samples)

    @property
    def last(self) -> Optional[Tuple[float, float]]:
        return self._samples[-1] if self._samples else None

    def push(self, t_s: float, value: float) -> "HistoryBuffer":
        """Append a sample, evicting the oldest when full"""
        if self._samples and t_s <= self._samples[-1][0]:
            raise NonMonotonicTimestamp(f"t={t_s:g} not after last sample t={self._samples[-1][0]:g}")
        self._samples.append((float(t_s), float(value)))
        return self

    def samples(self) -> List[Tuple[float, float]]:
        return list(self._samples)

    def window(self, t_lo: float, t_hi: float) -> List[float]:
        """Values with timestamps in [t_lo, t_hi]"""
        return [v for t, v in self._samples if t_lo <= t <= t_hi]


def push_history(buffer: HistoryBuffer, t_s: float, value: float) -> HistoryBuffer:
    return buffer.push(t_s, value)
