"""
Haze attenuation and electro-optical detection for hazefuse

Koschmieder visibility V = 3.912 / beta with a linear aerosol-index to extinction mapping
anchored at PSI 230 -> 5 km and capped at 10 km clear-air visibility
"""
import logging
import math
from typing import List, Tuple

from hazefuse.core.exceptions import DomainError
from hazefuse.core.world import WorldState
from hazefuse.sensors.types import Detection, SensorConfig, Source

logger = logging.getLogger(__name__)

KOSCHMIEDER_CONSTANT = 3.912  # ln(1/0.02), 2 % contrast threshold
MAX_VISIBILITY_M = 10000.0
BETA_CLEAR = KOSCHMIEDER_CONSTANT / MAX_VISIBILITY_M  # 3.912e-4 per meter
PSI_ANCHOR = 230.0
VISIBILITY_AT_ANCHOR_M = 5000.0
K_PSI = KOSCHMIEDER_CONSTANT / (VISIBILITY_AT_ANCHOR_M * PSI_ANCHOR)  # per meter per PSI unit

BANDS = ("vis", "ir")


def extinction_coefficient(psi: float, band: str = "vis", alpha_ir: float = 0.4) -> float:
    """
    Atmospheric extinction coefficient for a band

    Args:
        psi: Aerosol index
        band: 'vis' or 'ir'
        alpha_ir: IR extinction as a fraction of visible extinction

    Returns:
        beta in 1/m
    """
    if psi < 0:
        raise DomainError(f"aerosol index must be >= 0, got {psi}")
    if band not in BANDS:
        raise DomainError(f"unknown band '{band}'")
    beta_vis = max(BETA_CLEAR, K_PSI * psi)
    return beta_vis if band == "vis" else alpha_ir * beta_vis


def visibility_from_aerosol(psi: float) -> float:
    """Meteorological visibility in meters, in (0, 10000]"""
    beta = extinction_coefficient(psi)
    if beta <= BETA_CLEAR:
        return MAX_VISIBILITY_M
    return KOSCHMIEDER_CONSTANT / beta


def band_visibility(psi: float, band: str, alpha_ir: float = 0.4) -> float:
    """Effective visibility of a band; IR is not capped at the 10 km visible ceiling"""
    if band == "vis":
        return visibility_from_aerosol(psi)
    return visibility_from_aerosol(psi) / alpha_ir


def detection_range(contrast: float, beta: float, epsilon_contrast: float, hw_range_m: float) -> float:
    """Range at which apparent contrast C0*exp(-beta*d) falls to the threshold, capped by hardware"""
    if contrast <= epsilon_contrast:
        return 0.0
    return min(hw_range_m, math.log(contrast / epsilon_contrast) / beta)


def eo_scan(
    world: WorldState,
    own_pos: Tuple[float, float],
    cfg: SensorConfig,
    band: str,
    psi: float,
) -> List[Detection]:
    """
    Deterministic contrast-threshold EO scan over a full circle

    Args:
        world: Ground-truth snapshot
        own_pos: Sensor position
        cfg: Sensor configuration
        band: 'vis' or 'ir'
        psi: Aerosol index along the line of sight

    Returns:
        Detections at true positions, ordered by target id
    """
    beta = extinction_coefficient(psi, band, cfg.eo.alpha_ir)
    source = Source.EO_VIS.value if band == "vis" else Source.EO_IR.value
    detections = []
    for target in world.surface_targets():
        distance = target.range_to(own_pos)
        d_max = detection_range(target.contrast, beta, cfg.eo.epsilon_contrast, cfg.eo.hw_range_m)
        if distance > d_max:
            continue
        detections.append(
            Detection(
                source=source,
                t_s=world.t_s,
                det_id=len(detections),
                position_m=target.position_m,
                size_class_estimate=target.size_class,
                confidence=min(1.0, target.contrast * math.exp(-beta * distance)),
            )
        )
    logger.debug(f"{source} scan at t={world.t_s:g}: {len(detections)} detections (psi={psi:.1f})")
    return detections
