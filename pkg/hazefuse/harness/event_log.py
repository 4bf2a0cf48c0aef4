"""
Canonical JSON Lines event log for hazefuse
One record per line, keys sorted, floats at six significant digits, so equal runs give equal bytes
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

from hazefuse.utils.file_io import JsonLoader, canonical_dumps, canonical_value

KIND_ORDER = (
    "detection",
    "ais",
    "weather_reading",
    "weather_state",
    "schedule_update",
    "settings",
    "weight_profile",
    "fused",
    "risk_alert",
    "need_to_learn",
    "broadcast",
)
KIND_RANK = {kind: rank for rank, kind in enumerate(KIND_ORDER)}


@dataclass(frozen=True)
class EventRecord:
    t_s: float
    kind: str
    payload: Dict[str, Any]

    def __post_init__(self):
        if self.kind not in KIND_RANK:
            raise ValueError(f"unknown event kind '{self.kind}'")

    def to_line(self) -> str:
        return canonical_dumps({"t_s": self.t_s, "kind": self.kind, "payload": self.payload})

    @property
    def sort_key(self):
        return self.t_s, KIND_RANK[self.kind], canonical_dumps(self.payload)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EventRecord":
        return cls(t_s=float(data["t_s"]), kind=data["kind"], payload=data["payload"])


class EventLog:
    """
    Append-only writer that buffers one tick and writes it in canonical order

    Records are normalized through the canonical renderer on emit, so the sort key
    and the written bytes agree.
    """

    def __init__(self, path: Optional[Path] = None):
        self.logger = logging.getLogger(__name__)
        self.path = Path(path) if path is not None else None
        self._handle = None
        self._pending: List[EventRecord] = []
        self._last_t: Optional[float] = None
        self.records_written = 0
        self.kind_counts: Dict[str, int] = {}

    def __enter__(self) -> "EventLog":
        self.open()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def open(self) -> None:
        if self.path is not None and self._handle is None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = open(self.path, "w", encoding="utf-8", newline="\n")

    def emit(self, t_s: float, kind: str, payload: Dict[str, Any]) -> None:
        if self._pending and abs(self._pending[0].t_s - t_s) > 1e-9:
            self.flush()
        self._pending.append(EventRecord(float(canonical_value(t_s)), kind, canonical_value(payload)))

    def flush(self) -> List[EventRecord]:
        """Write the buffered tick in (t_s, kind order, payload) order"""
        records = sorted(self._pending, key=lambda r: r.sort_key)
        self._pending = []
        if records and self._last_t is not None and records[0].t_s < self._last_t:
            raise ValueError(f"event log time went backwards: {records[0].t_s:g} < {self._last_t:g}")
        for record in records:
            if self._handle is not None:
                self._handle.write(record.to_line() + "\n")
            self.kind_counts[record.kind] = self.kind_counts.get(record.kind, 0) + 1
        if records:
            self._last_t = records[-1].t_s
        self.records_written += len(records)
        return records

    def close(self) -> None:
        self.flush()
        if self._handle is not None:
            self._handle.close()
            self._handle = None
            self.logger.info(f"Event log closed: {self.records_written} records in {self.path}")


def read_event_log(path: Path) -> List[EventRecord]:
    """Parse an event log written by EventLog"""
    return [EventRecord.from_dict(item) for item in JsonLoader().load_lines(Path(path))]


def iter_kind(records: List[EventRecord], kind: str) -> Iterator[EventRecord]:
    return (r for r in records if r.kind == kind)
