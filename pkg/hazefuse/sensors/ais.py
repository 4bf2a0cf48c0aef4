"""
AIS reception for hazefuse
AIS is treated as lossless and exact; equipped vessels and remote stations may append a weather annex
"""
import logging
from typing import List

from hazefuse.core.scenario import Scenario
from hazefuse.core.world import WorldState, true_weather_at
from hazefuse.sensors.types import AISMessage, Detection, WeatherAnnex

logger = logging.getLogger(__name__)


def _annex(scenario: Scenario, position, t_s: float) -> WeatherAnnex:
    sample = true_weather_at(scenario, position, t_s)
    return WeatherAnnex(
        psi=sample.psi,
        rain_mmph=sample.rain_mmph,
        wind_mps=sample.wind_mps,
        humidity_pct=sample.humidity_pct,
        luminance_lux=sample.luminance_lux,
    )


def ais_receive(world: WorldState, scenario: Scenario) -> List[AISMessage]:
    """
    Collect one AIS message per equipped vessel and per remote station

    Args:
        world: Ground-truth snapshot
        scenario: Scenario holding vessel specs and stations

    Returns:
        Vessel messages ordered by sender id, then station messages ordered by id
    """
    messages = []
    specs = {spec.id: spec for spec in scenario.vessels}
    for vessel_id in sorted(specs):
        spec = specs[vessel_id]
        if not spec.ais_equipped:
            continue
        state = world.vessel_states[vessel_id]
        messages.append(
            AISMessage(
                sender_id=vessel_id,
                t_s=world.t_s,
                position_m=state.position_m,
                velocity_mps=state.velocity_mps,
                heading_rad=state.heading_rad,
                weather_annex=_annex(scenario, state.position_m, world.t_s) if spec.weather_annex else None,
            )
        )
    for station in sorted(scenario.remote_stations, key=lambda s: s.id):
        position = (float(station.position_m[0]), float(station.position_m[1]))
        messages.append(
            AISMessage(
                sender_id=station.id,
                t_s=world.t_s,
                position_m=position,
                velocity_mps=(0.0, 0.0),
                heading_rad=0.0,
                weather_annex=_annex(scenario, position, world.t_s) if station.weather_annex else None,
                is_station=True,
            )
        )
    logger.debug(f"AIS at t={world.t_s:g}: {len(messages)} messages")
    return messages


def ais_detections(messages: List[AISMessage]) -> List[Detection]:
    """Vessel messages as AIS detections; stations are weather feeds only"""
    vessel_messages = [m for m in messages if not m.is_station]
    return [message.to_detection(det_id) for det_id, message in enumerate(vessel_messages)]
