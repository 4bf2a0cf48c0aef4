"""
Seeded random substreams, one per sensor label
"""
import zlib
from typing import Dict

import numpy as np


class RandomStreams:
    """Derive independent, replayable generators from one scenario seed"""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: Dict[str, np.random.Generator] = {}

    def stream(self, label: str) -> np.random.Generator:
        """
        Get the generator for a label, creating it on first use

        Args:
            label: Stable stream label such as 'radar' or 'weather:psi'

        Returns:
            Generator seeded from (seed, crc32(label))
        """
        if label not in self._streams:
            key = zlib.crc32(label.encode("utf-8"))
            sequence = np.random.SeedSequence(self.seed, spawn_key=(key,))
            self._streams[label] = np.random.default_rng(sequence)
        return self._streams[label]
