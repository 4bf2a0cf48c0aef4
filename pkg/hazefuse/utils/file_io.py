"""
File input/output utilities for hazefuse
"""
import json
import logging
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from hazefuse.core.exceptions import ParseError

SIGNIFICANT_DIGITS = 6


class JsonLoader:
    """Load structured JSON documents (scenarios, dictionaries, logs)"""

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def load(self, file_path: Path) -> Any:
        """
        Load a UTF-8 JSON document

        Args:
            file_path: Path to the JSON file

        Returns:
            Parsed document

        Raises:
            ParseError: file is not valid JSON
            OSError: file cannot be read
        """
        text = Path(file_path).read_text(encoding="utf-8")
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"{file_path}: {e.msg} (line {e.lineno}, column {e.colno})") from e
        self.logger.debug(f"Loaded JSON document from {Path(file_path).name}")
        return document

    def load_lines(self, file_path: Path) -> list:
        """
        Load a JSON Lines file, one document per non-empty line

        Args:
            file_path: Path to the .jsonl file

        Returns:
            List of parsed records in file order
        """
        records = []
        with Path(file_path).open("r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as e:
                    raise ParseError(f"{file_path}:{lineno}: {e.msg}") from e
        self.logger.info(f"Loaded {len(records)} records from {Path(file_path).name}")
        return records


def canonical_value(obj: Any) -> Any:
    """Convert to plain JSON types with floats rounded to 6 significant digits"""
    if is_dataclass(obj) and not isinstance(obj, type):
        return canonical_value(asdict(obj))
    if isinstance(obj, Enum):
        return canonical_value(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}") + 0.0
    if isinstance(obj, dict):
        return {str(k): canonical_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [canonical_value(v) for v in items]
    if isinstance(obj, np.ndarray):
        return canonical_value(obj.tolist())
    if isinstance(obj, Path):
        return str(obj)
    return obj


def canonical_dumps(obj: Any) -> str:
    """Render one canonical JSON line: sorted keys, compact separators"""
    return json.dumps(canonical_value(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def write_json(file_path: Path, obj: Any) -> None:
    """Write a human-readable JSON document (dictionaries, metrics)"""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(canonical_value(obj), sort_keys=True, indent=2, ensure_ascii=False)
    file_path.write_text(text + "\n", encoding="utf-8")
