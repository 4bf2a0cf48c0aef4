"""
Tests for the canonical event log and JSON helpers
"""
import json
import math

import numpy as np
import pytest

from hazefuse.core.exceptions import ParseError
from hazefuse.harness.event_log import EventLog, EventRecord, iter_kind, read_event_log
from hazefuse.utils.file_io import JsonLoader, canonical_dumps, canonical_value, write_json


def test_canonical_value_rounds_and_nulls():
    assert canonical_value(1.23456789) == 1.23457
    assert canonical_value(math.nan) is None
    assert canonical_value(np.float64(-0.0)) == 0.0
    assert canonical_value({"a": (1, np.int64(2))}) == {"a": [1, 2]}
    assert canonical_value(np.bool_(True)) is True


def test_canonical_dumps_sorts_keys():
    assert canonical_dumps({"b": 1, "a": 2.0}) == '{"a":2.0,"b":1}'


def test_records_of_a_tick_are_sorted(tmp_path):
    path = tmp_path / "run.jsonl"
    with EventLog(path) as log:
        log.emit(0.0, "fused", {"objects": []})
        log.emit(0.0, "detection", {"source": "radar", "det_id": 1})
        log.emit(0.0, "detection", {"source": "eo_ir", "det_id": 0})
        log.emit(1.0, "ais", {"sender_id": "alpha"})
    kinds = [json.loads(line)["kind"] for line in path.read_text().splitlines()]
    assert kinds == ["detection", "detection", "fused", "ais"]
    records = read_event_log(path)
    assert [r.payload.get("source") for r in iter_kind(records, "detection")] == ["eo_ir", "radar"]


def test_equal_inputs_give_equal_bytes(tmp_path):
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    for path in paths:
        with EventLog(path) as log:
            log.emit(0.5, "weather_reading", {"psi": 230.0000001, "rain_mmph": 0.1})
            log.emit(0.5, "weather_state", {"template": "hazy", "distance": 1 / 3})
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_log_counts_kinds_without_a_file():
    log = EventLog()
    log.emit(0.0, "detection", {})
    log.emit(0.0, "detection", {"det_id": 1})
    log.emit(1.0, "broadcast", {})
    log.close()
    assert log.records_written == 3
    assert log.kind_counts == {"detection": 2, "broadcast": 1}


def test_log_rejects_time_going_backwards():
    log = EventLog()
    log.emit(5.0, "detection", {})
    log.emit(6.0, "detection", {})
    with pytest.raises(ValueError, match="backwards"):
        log.emit(4.0, "detection", {})
        log.flush()


def test_unknown_kind_is_rejected():
    with pytest.raises(ValueError):
        EventRecord(0.0, "gossip", {})


def test_json_loader_reports_bad_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"t_s": 0, "kind": "ais", "payload": {}}\n{oops\n')
    with pytest.raises(ParseError, match=":2:"):
        JsonLoader().load_lines(path)


def test_write_json_is_readable(tmp_path):
    path = tmp_path / "nested" / "report.json"
    write_json(path, {"recall": 0.123456789, "missing": float("inf")})
    assert JsonLoader().load(path) == {"missing": None, "recall": 0.123457}
