"""
Radar and sonar models for hazefuse
All-weather range-gated detection with class-dependent detection probability
"""
import logging
from collections import deque
from dataclasses import replace
from typing import Deque, List, Optional, Sequence, Tuple

import numpy as np

from hazefuse.core.world import ObjectState, WorldState
from hazefuse.sensors.types import Detection, SensorConfig, Source

logger = logging.getLogger(__name__)

NOISE_CLIP_SIGMAS = 5.0


def _range_gated_scan(
    targets: Sequence[ObjectState],
    own_pos: Tuple[float, float],
    t_s: float,
    source: str,
    r_min_m: float,
    r_max_m: float,
    sigma_pos_m: float,
    p_det_for,
    rng: np.random.Generator,
) -> List[Detection]:
    """Shared radar kernel: one uniform and two normals per candidate, drawn whatever the geometry"""
    detections = []
    limit = NOISE_CLIP_SIGMAS * sigma_pos_m
    for target in targets:
        draw = rng.random()
        noise = np.clip(rng.normal(0.0, sigma_pos_m, size=2), -limit, limit)
        distance = target.range_to(own_pos)
        if not r_min_m <= distance <= r_max_m:
            continue
        if draw >= p_det_for(target):
            continue
        detections.append(
            Detection(
                source=source,
                t_s=t_s,
                det_id=len(detections),
                position_m=(target.position_m[0] + float(noise[0]), target.position_m[1] + float(noise[1])),
                confidence=float(p_det_for(target)),
            )
        )
    return detections


def radar_scan(
    world: WorldState,
    own_pos: Tuple[float, float],
    cfg: SensorConfig,
    rng: np.random.Generator,
) -> List[Detection]:
    """
    Radar scan of surface targets

    Args:
        world: Ground-truth snapshot
        own_pos: Radar position
        cfg: Sensor configuration
        rng: The radar substream

    Returns:
        Detections inside [r_min_m, r_max_m] that pass the Bernoulli draw, with Gaussian position noise
    """
    radar = cfg.radar
    detections = _range_gated_scan(
        world.surface_targets(),
        own_pos,
        world.t_s,
        Source.RADAR.value,
        radar.r_min_m,
        radar.r_max_m,
        radar.sigma_pos_m,
        lambda target: radar.p_det.get(target.size_class, 0.0),
        rng,
    )
    logger.debug(f"radar scan at t={world.t_s:g}: {len(detections)} detections")
    return detections


def sonar_scan(
    world: WorldState,
    own_pos: Tuple[float, float],
    cfg: SensorConfig,
    rng: np.random.Generator,
) -> List[Detection]:
    """Sonar scan: the radar kernel restricted to short range and, by default, submerged obstacles"""
    sonar = cfg.sonar
    targets = world.submerged_targets()
    if not sonar.submerged_only:
        targets = world.all_targets()
    detections = _range_gated_scan(
        targets,
        own_pos,
        world.t_s,
        Source.SONAR.value,
        0.0,
        sonar.r_max_m,
        sonar.sigma_pos_m,
        lambda target: sonar.p_det,
        rng,
    )
    logger.debug(f"sonar scan at t={world.t_s:g}: {len(detections)} detections")
    return detections


class RadarDifferencer:
    """
    Derive radar velocities by differencing consecutive scans

    Detections are chained scan-to-scan by nearest neighbour inside a gate; the velocity is
    taken against the oldest position in the chain (up to `baseline_scans` back), which
    averages down the position noise. A miss breaks the chain.
    """

    def __init__(self, gate_m: float = 200.0, baseline_scans: int = 10):
        self.logger = logging.getLogger(__name__)
        self.gate_m = gate_m
        self.baseline_scans = baseline_scans
        self._chains: List[Deque[Tuple[float, Tuple[float, float]]]] = []

    def apply(self, detections: List[Detection]) -> List[Detection]:
        """
        Attach velocities to a radar scan and remember it for the next one

        Args:
            detections: Current radar scan

        Returns:
            Same detections, with velocity_mps where a chain of two or more scans exists
        """
        previous = [chain[-1][1] for chain in self._chains]
        pairs = []
        for i, det in enumerate(detections):
            for j, pos in enumerate(previous):
                gap = float(np.hypot(det.position_m[0] - pos[0], det.position_m[1] - pos[1]))
                if gap <= self.gate_m:
                    pairs.append((gap, det.det_id, j, i))
        pairs.sort()

        taken_prev, chain_for = set(), {}
        for _, _, j, i in pairs:
            if j in taken_prev or i in chain_for:
                continue
            taken_prev.add(j)
            chain_for[i] = j

        result, chains = [], []
        for i, det in enumerate(detections):
            chain: Deque = deque(maxlen=self.baseline_scans + 1)
            if i in chain_for:
                chain.extend(self._chains[chain_for[i]])
            chain.append((det.t_s, det.position_m))
            chains.append(chain)
            velocity = self._velocity(chain)
            result.append(replace(det, velocity_mps=velocity) if velocity is not None else det)

        self._chains = chains
        return result

    @staticmethod
    def _velocity(chain) -> Optional[Tuple[float, float]]:
        if len(chain) < 2:
            return None
        (t0, p0), (t1, p1) = chain[0], chain[-1]
        elapsed = t1 - t0
        if elapsed <= 0:
            return None
        return ((p1[0] - p0[0]) / elapsed, (p1[1] - p0[1]) / elapsed)
