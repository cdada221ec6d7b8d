"""
Record Writer Module

Turns result models into flat records and writes them as JSON lines or CSV.
Exact values are written as "num/den" strings; floats only appear under keys
ending in "_approx".
"""

import json
import sys
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, TextIO

import pandas as pd
from loguru import logger
from pydantic import BaseModel

from .config import RunConfig
from .exact_core import Dyadic, Interval, format_rational

APPROX_SUFFIX = "_approx"


def _approx_key(key: str) -> str:
    return key if key.endswith(APPROX_SUFFIX) else key + APPROX_SUFFIX


def to_value(value: Any) -> Any:
    """Convert one value to its JSON form (exact values as strings)."""
    if isinstance(value, (Fraction, Dyadic)):
        return format_rational(value)
    if isinstance(value, Interval):
        return {
            "lo": format_rational(value.lo),
            "hi": format_rational(value.hi),
            "width": format_rational(value.width()),
            "width_approx": float(value.width()),
        }
    if isinstance(value, BaseModel):
        return to_record(value)
    if isinstance(value, dict):
        return to_record(value)
    if isinstance(value, (list, tuple)):
        return [to_value(v) for v in value]
    return value


def to_record(source: Any, **extra: Any) -> Dict[str, Any]:
    """
    Flatten a result model (or dict) into a record.

    Args:
        source: pydantic model or mapping
        extra: fields added in front, e.g. the input spec

    Returns:
        Dict with exact values as strings and float fields renamed to *_approx
    """
    if isinstance(source, BaseModel):
        items = [(name, getattr(source, name)) for name in type(source).model_fields]
    else:
        items = list(source.items())
    record: Dict[str, Any] = {}
    for key, value in list(extra.items()) + items:
        if isinstance(value, float):
            record[_approx_key(key)] = value
        else:
            record[key] = to_value(value)
    return record


class RecordWriter:
    """Writes records to a text stream in the run's output format"""

    def __init__(self, output_format: str = "json", stream: Optional[TextIO] = None,
                 run: Optional[RunConfig] = None):
        if output_format not in ("csv", "json"):
            raise ValueError(f"unknown output format {output_format!r}")
        self.output_format = output_format
        self.stream = stream or sys.stdout
        self.run = run

    def write(self, records: Iterable[Dict[str, Any]]) -> int:
        """Write all records; returns how many were written."""
        records = list(records)
        if self.output_format == "json":
            self._write_json(records)
        else:
            self._write_csv(records)
        logger.debug(f"Wrote {len(records)} {self.output_format} records")
        return len(records)

    def _write_json(self, records: List[Dict[str, Any]]) -> None:
        if self.run is not None:
            self.stream.write(json.dumps({"record": "run", **self.run.model_dump()}) + "\n")
        for record in records:
            self.stream.write(json.dumps(record) + "\n")

    def _write_csv(self, records: List[Dict[str, Any]]) -> None:
        frame = pd.json_normalize(records) if records else pd.DataFrame()
        for column in frame.columns:
            if frame[column].map(lambda v: isinstance(v, list)).any():
                frame[column] = frame[column].map(
                    lambda v: " ".join(json.dumps(item) if isinstance(item, dict) else str(item) for item in v)
                    if isinstance(v, list) else v
                )
        frame.to_csv(self.stream, index=False, lineterminator="\n")
