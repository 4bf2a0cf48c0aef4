"""
Multi-source association and fusion for hazefuse

Detections from all sensors in one tick are associated by a fuzzy position/velocity
affinity, fused with range-zoned weights and carried across ticks by a short track memory.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from hazefuse.core.world import compass_bearing
from hazefuse.processing.sensor_manager import WeightProfile
from hazefuse.sensors.types import EO_SOURCES, Detection, RadarConfig, Source

logger = logging.getLogger(__name__)

AIS_MULTIPLIER = 2.0
TRACK_GATE_M = 200.0
TRACK_MAX_MISSES = 5
TRACK_HISTORY = 60
FIT_MIN_POINTS = 3
FIT_WINDOW = 6
STATIONARY_WINDOW = 30
STATIONARY_SPEED_MPS = 0.2
STATIONARY_MIN_POINTS = 10
STATIONARY_SLACK_SE = 2.0
SPURIOUS_LOOKBACK_TICKS = 5
SMALL_OBJECT_MIN_TICKS = 3
HEADING_WINDOW = 30
HEADING_MIN_SPEED_MPS = 0.5

CATEGORIES = ("ais_confirmed", "radar_eo", "small_object", "fixed_structure", "spurious", "underwater")

Vec2 = Tuple[float, float]


@dataclass(frozen=True)
class AssociationParams:
    sigma_p: float = 100.0
    sigma_v: float = 2.0
    mu_accept: float = 0.5
    mu_loose: float = 0.1
    loose_zone_weight: float = 0.3


def _distance(a: Vec2, b: Vec2) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def affinity(a: Detection, b: Detection, params: AssociationParams = AssociationParams()) -> float:
    """Fuzzy correspondence exp(-dp^2/2sp^2 - dv^2/2sv^2); the velocity term needs both velocities"""
    dp = _distance(a.position_m, b.position_m)
    exponent = dp * dp / (2.0 * params.sigma_p ** 2)
    if a.velocity_mps is not None and b.velocity_mps is not None:
        dv = _distance(a.velocity_mps, b.velocity_mps)
        exponent += dv * dv / (2.0 * params.sigma_v ** 2)
    return math.exp(-exponent)


def _flatten(detections: Union[Mapping[str, Sequence[Detection]], Iterable[Detection]]) -> List[Detection]:
    if isinstance(detections, Mapping):
        items = [d for batch in detections.values() for d in batch]
    else:
        items = list(detections)
    return sorted(items, key=lambda d: d.key)


def associate(
    detections: Union[Mapping[str, Sequence[Detection]], Iterable[Detection]],
    weights: WeightProfile,
    own_pos: Vec2 = (0.0, 0.0),
    params: AssociationParams = AssociationParams(),
) -> Tuple[List[List[Detection]], List[Detection]]:
    """
    Partition one tick's detections into groups and unmatched items

    Pairs are merged greedily in descending affinity. Pairs above mu_accept merge outright;
    loose pairs between mu_loose and mu_accept merge only when one side is AIS or both
    sources carry a zone weight of at least 0.3. Two detections of the same source never
    share a group.

    Args:
        detections: Detections keyed by source, or a flat iterable
        weights: Fusion weight profile in force
        own_pos: Own-ship position, for zone lookup
        params: Affinity and acceptance parameters

    Returns:
        (groups, unmatched); every input detection appears exactly once
    """
    items = _flatten(detections)
    n = len(items)
    parent = list(range(n))
    sources = [{d.source} for d in items]

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if items[i].source == items[j].source:
                continue
            mu = affinity(items[i], items[j], params)
            if mu >= params.mu_loose:
                pairs.append((-mu, items[i].key, items[j].key, i, j))
    pairs.sort()

    for neg_mu, _, _, i, j in pairs:
        ri, rj = find(i), find(j)
        if ri == rj or sources[ri] & sources[rj]:
            continue
        if -neg_mu < params.mu_accept and not _loose_accept(items[i], items[j], weights, own_pos, params):
            continue
        low, high = min(ri, rj), max(ri, rj)
        parent[high] = low
        sources[low] |= sources[high]

    components: Dict[int, List[Detection]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(items[i])

    groups, unmatched = [], []
    for root in sorted(components):
        members = components[root]
        if len(members) >= 2 or any(d.source == Source.AIS.value for d in members):
            groups.append(members)
        else:
            unmatched.extend(members)
    return groups, unmatched


def _loose_accept(a: Detection, b: Detection, weights: WeightProfile, own_pos: Vec2, params: AssociationParams) -> bool:
    if Source.AIS.value in (a.source, b.source):
        return True
    wa = weights.weight_for(a.source, _distance(a.position_m, own_pos))
    wb = weights.weight_for(b.source, _distance(b.position_m, own_pos))
    return wa >= params.loose_zone_weight and wb >= params.loose_zone_weight


def fuse_position(
    group: Sequence[Detection],
    weights: WeightProfile,
    own_pos: Vec2 = (0.0, 0.0),
) -> Tuple[Vec2, Optional[Vec2]]:
    """
    Weighted position of a group and its best sensor velocity

    Args:
        group: Associated detections
        weights: Fusion weight profile
        own_pos: Own-ship position, for zone lookup

    Returns:
        (position, velocity); velocity comes from AIS, else from radar differencing, else None
    """
    if not group:
        raise ValueError("cannot fuse an empty group")
    w = []
    for det in group:
        weight = weights.weight_for(det.source, _distance(det.position_m, own_pos))
        if det.source == Source.AIS.value:
            weight *= AIS_MULTIPLIER
        w.append(weight)
    w = np.asarray(w, dtype=float)
    if w.sum() <= 0.0:
        logger.warning(f"All fusion weights zero for group of {len(group)}; using uniform weights")
        w = np.ones(len(group))
    positions = np.asarray([d.position_m for d in group], dtype=float)
    fused = (w[:, None] * positions).sum(axis=0) / w.sum()

    velocity = None
    for source in (Source.AIS.value, Source.RADAR.value):
        with_velocity = [d for d in group if d.source == source and d.velocity_mps is not None]
        if with_velocity:
            velocity = with_velocity[0].velocity_mps
            break
    return (float(fused[0]), float(fused[1])), velocity


@dataclass(frozen=True)
class TrackPoint:
    t_s: float
    position_m: Vec2
    sources: Tuple[str, ...]
    range_m: float
    velocity_mps: Optional[Vec2] = None
    size_class: Optional[str] = None


@dataclass
class Track:
    """Short per-object history keyed by fused id"""
    fid: int
    identity: Optional[str] = None
    first_seen_t: float = 0.0
    points: Deque[TrackPoint] = field(default_factory=lambda: deque(maxlen=TRACK_HISTORY))

    @property
    def last(self) -> TrackPoint:
        return self.points[-1]

    def add(self, point: TrackPoint) -> None:
        if not self.points:
            self.first_seen_t = point.t_s
        self.points.append(point)

    def _fit(self, window: int) -> Tuple[Vec2, float]:
        """Constant-velocity fit over the last `window` points: (velocity, standard error of the speed)"""
        recent = list(self.points)[-window:]
        t = np.asarray([p.t_s for p in recent])
        t = t - t.mean()
        xy = np.asarray([p.position_m for p in recent])
        slope, intercept = np.polyfit(t, xy, 1)
        residuals = xy - (np.outer(t, slope) + intercept)
        dof = max(1, len(recent) - 2)
        se = np.sqrt((residuals ** 2).sum(axis=0) / dof / float(t @ t))
        return (float(slope[0]), float(slope[1])), float(np.hypot(*se))

    def fitted_velocity(self) -> Optional[Vec2]:
        """Least-squares velocity over the most recent points; None below three points"""
        if len(self.points) < FIT_MIN_POINTS:
            return None
        return self._fit(FIT_WINDOW)[0]

    def velocity(self) -> Optional[Vec2]:
        """Latest sensor velocity, else the fitted one"""
        if self.points and self.last.velocity_mps is not None:
            return self.last.velocity_mps
        return self.fitted_velocity()

    def is_stationary(self) -> bool:
        """Slow over both the short and the long recent window, allowing for position noise"""
        if len(self.points) < STATIONARY_MIN_POINTS:
            return False
        for window in (FIT_WINDOW, STATIONARY_WINDOW):
            velocity, se = self._fit(window)
            if math.hypot(*velocity) >= STATIONARY_SPEED_MPS + STATIONARY_SLACK_SE * se:
                return False
        return True

    def heading_variance(self) -> float:
        """Variance of unwrapped headings over the recent moving points; 0 with fewer than three"""
        headings = []
        for point in list(self.points)[-HEADING_WINDOW:]:
            if point.velocity_mps is not None and math.hypot(*point.velocity_mps) > HEADING_MIN_SPEED_MPS:
                headings.append(compass_bearing(*point.velocity_mps))
        if len(headings) < 3:
            return 0.0
        return float(np.var(np.unwrap(headings)))

    def projected(self, t_s: float) -> Vec2:
        velocity = self.velocity() or (0.0, 0.0)
        elapsed = t_s - self.last.t_s
        return self.last.position_m[0] + velocity[0] * elapsed, self.last.position_m[1] + velocity[1] * elapsed


@dataclass(frozen=True)
class Candidate:
    """A group or unmatched detection waiting for a track"""
    detections: Tuple[Detection, ...]
    position_m: Vec2
    velocity_mps: Optional[Vec2]

    @property
    def identity(self) -> Optional[str]:
        for det in self.detections:
            if det.source == Source.AIS.value:
                return det.object_hint
        return None

    @property
    def sources(self) -> Tuple[str, ...]:
        return tuple(det.source for det in self.detections)

    @property
    def size_class(self) -> Optional[str]:
        for det in self.detections:
            if det.size_class_estimate is not None:
                return det.size_class_estimate
        return None


class TrackMemory:
    """Keeps fused ids stable across ticks: AIS identity first, then gated nearest neighbour"""

    def __init__(self, gate_m: float = TRACK_GATE_M, max_misses: int = TRACK_MAX_MISSES, dt_s: float = 1.0):
        self.logger = logging.getLogger(__name__)
        self.gate_m = gate_m
        self.max_misses = max_misses
        self.dt_s = dt_s
        self.tracks: Dict[int, Track] = {}
        self._next_fid = 0

    def update(self, t_s: float, candidates: Sequence[Candidate], own_pos: Vec2 = (0.0, 0.0)) -> List[Track]:
        """
        Attach candidates to tracks, open new tracks and drop stale ones

        Returns:
            The track of each candidate, in candidate order
        """
        assigned: Dict[int, int] = {}
        by_identity = {tr.identity: fid for fid, tr in self.tracks.items() if tr.identity is not None}
        for index, cand in enumerate(candidates):
            fid = by_identity.get(cand.identity) if cand.identity is not None else None
            if fid is not None and fid not in assigned.values():
                assigned[index] = fid

        pairs = []
        for index, cand in enumerate(candidates):
            if index in assigned:
                continue
            for fid, track in self.tracks.items():
                if track.identity is not None and cand.identity is not None and track.identity != cand.identity:
                    continue
                gap = _distance(cand.position_m, track.projected(t_s))
                if gap <= self.gate_m:
                    pairs.append((gap, index, fid))
        pairs.sort()
        for _, index, fid in pairs:
            if index in assigned or fid in assigned.values():
                continue
            assigned[index] = fid

        result = []
        for index, cand in enumerate(candidates):
            if index in assigned:
                track = self.tracks[assigned[index]]
            else:
                track = Track(fid=self._next_fid)
                self._next_fid += 1
                self.tracks[track.fid] = track
            if cand.identity is not None:
                track.identity = cand.identity
            track.add(
                TrackPoint(
                    t_s=t_s,
                    position_m=cand.position_m,
                    sources=cand.sources,
                    range_m=_distance(cand.position_m, own_pos),
                    velocity_mps=cand.velocity_mps,
                    size_class=cand.size_class,
                )
            )
            result.append(track)

        stale = [fid for fid, tr in self.tracks.items() if t_s - tr.last.t_s > self.max_misses * self.dt_s + 1e-9]
        for fid in stale:
            del self.tracks[fid]
        if stale:
            self.logger.debug(f"Dropped {len(stale)} stale tracks at t={t_s:g}")
        return result


def classify_unmatched(track: Track, radar_cfg: RadarConfig, now_t: Optional[float] = None, dt_s: float = 1.0) -> str:
    """
    Fuzzy category of an item no other sensor confirmed

    First matching rule wins: a single-source one-off in the last five ticks is spurious;
    a persistent EO-only contact in the radar shadow or of small size is a small object;
    a slow contact over ten or more ticks is a fixed structure; a sonar-only contact is
    underwater; anything else is a small object.
    """
    now_t = track.last.t_s if now_t is None else now_t
    recent = [p for p in track.points if p.t_s > now_t - SPURIOUS_LOOKBACK_TICKS * dt_s + 1e-9]
    if len(recent) == 1 and len(set(recent[0].sources)) == 1:
        return "spurious"

    sources = {s for p in track.points for s in p.sources}
    last = track.last
    if sources <= EO_SOURCES and len(track.points) >= SMALL_OBJECT_MIN_TICKS:
        if last.range_m < radar_cfg.r_min_m or last.size_class == "small":
            return "small_object"
    if track.is_stationary():
        return "fixed_structure"
    if sources == {Source.SONAR.value}:
        return "underwater"
    return "small_object"


@dataclass(frozen=True)
class FusedObject:
    """One fused contact for the current tick"""
    fid: int
    contributing: Tuple[Detection, ...]
    position_m: Vec2
    velocity_mps: Optional[Vec2]
    identity: Optional[str]
    category: str
    first_seen_t: float
    last_seen_t: float
    spread_m: float = 0.0

    def __post_init__(self):
        if not self.contributing:
            raise ValueError("fused object needs at least one contributor")
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category '{self.category}'")
        if self.category == "ais_confirmed" and self.identity is None:
            raise ValueError("ais_confirmed objects need an identity")

    @property
    def sources(self) -> Tuple[str, ...]:
        return tuple(d.source for d in self.contributing)

    def summary(self) -> dict:
        return {
            "fid": self.fid,
            "category": self.category,
            "identity": self.identity,
            "position_m": self.position_m,
            "velocity_mps": self.velocity_mps,
            "sources": list(self.sources),
            "spread_m": self.spread_m,
            "first_seen_t": self.first_seen_t,
        }


class FusionEngine:
    """Per-tick associate -> fuse -> track -> classify pipeline"""

    def __init__(
        self,
        radar_cfg: RadarConfig,
        params: AssociationParams = AssociationParams(),
        dt_s: float = 1.0,
    ):
        self.logger = logging.getLogger(__name__)
        self.radar_cfg = radar_cfg
        self.params = params
        self.dt_s = dt_s
        self.memory = TrackMemory(dt_s=dt_s)

    def track(self, fid: int) -> Optional[Track]:
        return self.memory.tracks.get(fid)

    def process(
        self,
        t_s: float,
        detections: Union[Mapping[str, Sequence[Detection]], Iterable[Detection]],
        weights: WeightProfile,
        own_pos: Vec2,
    ) -> List[FusedObject]:
        """
        Fuse one tick of detections

        Args:
            t_s: Tick time
            detections: All detections of the tick
            weights: Fusion weights in force
            own_pos: Own-ship position

        Returns:
            Fused objects ordered by fid
        """
        groups, unmatched = associate(detections, weights, own_pos, self.params)
        candidates = []
        for group in groups:
            position, velocity = fuse_position(group, weights, own_pos)
            candidates.append(Candidate(tuple(group), position, velocity))
        for det in unmatched:
            candidates.append(Candidate((det,), det.position_m, det.velocity_mps))

        tracks = self.memory.update(t_s, candidates, own_pos)
        fused = []
        for index, (cand, track) in enumerate(zip(candidates, tracks)):
            is_group = index < len(groups)
            if is_group and cand.identity is not None:
                category = "ais_confirmed"
            elif is_group and not set(cand.sources) <= EO_SOURCES:
                category = "fixed_structure" if track.is_stationary() else "radar_eo"
            else:
                # EO-only groups are both bands seeing one target, still unconfirmed by radar
                category = classify_unmatched(track, self.radar_cfg, t_s, self.dt_s)
            velocity = cand.velocity_mps if cand.velocity_mps is not None else track.fitted_velocity()
            spread = max(_distance(d.position_m, cand.position_m) for d in cand.detections)
            fused.append(
                FusedObject(
                    fid=track.fid,
                    contributing=cand.detections,
                    position_m=cand.position_m,
                    velocity_mps=velocity,
                    identity=cand.identity,
                    category=category,
                    first_seen_t=track.first_seen_t,
                    last_seen_t=t_s,
                    spread_m=spread,
                )
            )
        fused.sort(key=lambda obj: obj.fid)
        self.logger.debug(f"t={t_s:g}: {len(groups)} groups, {len(unmatched)} unmatched -> {len(fused)} fused objects")
        return fused
