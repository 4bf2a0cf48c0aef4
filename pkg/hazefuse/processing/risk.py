"""
Collision risk for hazefuse
Closest point of approach and rule-based risk flags per fused object
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from hazefuse.processing.fusion import FusedObject

logger = logging.getLogger(__name__)

RISK_LEVELS = ("none", "watch", "high")
FLAGS = ("cpa_breach", "fast_mover", "close_quarters", "complex_maneuver", "path_intersect", "no_ais_small")

Vec2 = Tuple[float, float]


@dataclass(frozen=True)
class RiskParams:
    d_safe_m: float = 500.0
    t_horizon_s: float = 600.0
    fast_mps: float = 15.0
    close_m: float = 1000.0
    heading_var_rad2: float = 0.3


@dataclass(frozen=True)
class RiskAssessment:
    fid: int
    t_cpa_s: float
    d_cpa_m: float
    flags: Tuple[str, ...]
    risk: str

    def __post_init__(self):
        if self.t_cpa_s < 0 or self.d_cpa_m < 0:
            raise ValueError("t_cpa and d_cpa must be >= 0")
        if self.risk not in RISK_LEVELS:
            raise ValueError(f"unknown risk level '{self.risk}'")
        if self.risk == "high" and not self.flags:
            raise ValueError("high risk needs at least one flag")

    def summary(self) -> dict:
        return {
            "fid": self.fid,
            "t_cpa_s": self.t_cpa_s,
            "d_cpa_m": self.d_cpa_m,
            "flags": list(self.flags),
            "risk": self.risk,
        }


def cpa(own: Tuple[Vec2, Vec2], other: Tuple[Vec2, Vec2]) -> Tuple[float, float]:
    """
    Closest point of approach between two constant-velocity tracks

    Args:
        own: (position, velocity) of the own ship
        other: (position, velocity) of the contact

    Returns:
        (t_cpa_s, d_cpa_m); t is clamped at now for diverging or co-moving tracks
    """
    p = np.asarray(other[0], dtype=float) - np.asarray(own[0], dtype=float)
    v = np.asarray(other[1], dtype=float) - np.asarray(own[1], dtype=float)
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
        raise ValueError("cpa inputs must be finite")
    vv = float(v @ v)
    if vv < 1e-9:
        return 0.0, float(np.hypot(*p))
    t = max(0.0, -float(p @ v) / vv)
    return t, float(np.hypot(*(p + v * t)))


def risk_level(flags: Sequence[str], category: Optional[str] = None) -> str:
    """high on a CPA breach or a fast mover at close quarters; watch on any other flag"""
    if category == "fixed_structure":
        return "watch" if "cpa_breach" in flags else "none"
    if "cpa_breach" in flags or ("close_quarters" in flags and "fast_mover" in flags):
        return "high"
    return "watch" if flags else "none"


def assess_risk(
    fused: Sequence[FusedObject],
    own: Tuple[Vec2, Vec2],
    params: RiskParams = RiskParams(),
    heading_variance: Optional[Callable[[int], float]] = None,
) -> List[RiskAssessment]:
    """
    Flag high-risk contacts

    Args:
        fused: Fused objects of the tick
        own: Own-ship (position, velocity)
        params: Thresholds
        heading_variance: fid -> heading variance over the recent track (default 0)

    Returns:
        One RiskAssessment per fused object, ordered by fid
    """
    own_pos, own_vel = own
    if not all(math.isfinite(c) for c in own_vel):
        raise ValueError("own velocity must be finite")

    results = []
    for obj in sorted(fused, key=lambda o: o.fid):
        velocity = obj.velocity_mps or (0.0, 0.0)
        t_cpa, d_cpa = cpa(own, (obj.position_m, velocity))
        rng = math.hypot(obj.position_m[0] - own_pos[0], obj.position_m[1] - own_pos[1])

        flags = []
        breach = d_cpa < params.d_safe_m and 0.0 <= t_cpa < params.t_horizon_s
        if breach:
            flags.append("cpa_breach")
        if math.hypot(*velocity) > params.fast_mps:
            flags.append("fast_mover")
        if rng < params.close_m:
            flags.append("close_quarters")
        if heading_variance is not None and heading_variance(obj.fid) > params.heading_var_rad2:
            flags.append("complex_maneuver")
        if breach and t_cpa > 0.0:
            flags.append("path_intersect")
        if obj.category == "small_object":
            flags.append("no_ais_small")

        results.append(RiskAssessment(obj.fid, t_cpa, d_cpa, tuple(flags), risk_level(flags, obj.category)))

    high = [r.fid for r in results if r.risk == "high"]
    if high:
        logger.debug(f"High-risk contacts: {high}")
    return results
