"""Transaction ingestion: CSV parsing, timestamp densification, day grouping."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, TextIO

import numpy as np

SECONDS_PER_DAY = 86400
_EPOCH = date(1970, 1, 1)


class ParseError(ValueError):
    """Malformed input; the message names the offending 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class TransactionRecord:
    """One raw event: an opaque entity id and an epoch-seconds UTC timestamp."""

    entity_id: str
    timestamp: int

    def __post_init__(self):
        if not self.entity_id:
            raise ValueError("entity_id must be non-empty")
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")


@dataclass(frozen=True)
class DataCollection:
    """All events of one entity on one UTC calendar day.

    Events are stored as seconds-of-day offsets in [0, 86400); their order
    carries no meaning.  This is the unit that detectors classify.
    """

    entity_id: str
    day: date
    events: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.entity_id:
            raise ValueError("entity_id must be non-empty")
        object.__setattr__(self, "events", tuple(int(e) for e in self.events))
        for e in self.events:
            if not 0 <= e < SECONDS_PER_DAY:
                raise ValueError(f"event offset {e} outside [0, {SECONDS_PER_DAY})")

    @property
    def key(self) -> str:
        """Stable identifier used in verdicts and label files."""
        return f"{self.entity_id}:{self.day.isoformat()}"

    def __len__(self) -> int:
        return len(self.events)


def parse_records(text: str | TextIO) -> list[TransactionRecord]:
    """Parse CSV with an ``entity_id,timestamp`` header into records.

    Extra columns are ignored by name.  A header-only input yields an empty
    list; any malformed data row raises :class:`ParseError` naming its line.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "missing header") from None
    columns = [h.strip() for h in header]
    try:
        id_col = columns.index("entity_id")
        ts_col = columns.index("timestamp")
    except ValueError:
        raise ParseError(1, "header must contain entity_id and timestamp columns") from None

    records = []
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != len(columns):
            raise ParseError(line, f"expected {len(columns)} fields, got {len(row)}")
        entity = row[id_col].strip()
        raw_ts = row[ts_col].strip()
        try:
            ts = int(raw_ts)
        except ValueError:
            raise ParseError(line, f"timestamp {raw_ts!r} is not an integer") from None
        if not entity:
            raise ParseError(line, "entity_id must be non-empty")
        if ts < 0:
            raise ParseError(line, f"timestamp {ts} is negative")
        records.append(TransactionRecord(entity, ts))
    return records


def enhance_timestamps(records: list[TransactionRecord], seed: int) -> list[TransactionRecord]:
    """Replace each timestamp's minute and second with uniform draws on [0, 59].

    Hour, day and entity are untouched.  The same seed always reproduces the
    same output, which is what makes hour-aligned dumps usable as if they had
    full-resolution timestamps.
    """
    rng = np.random.default_rng(seed)
    if not records:
        return []
    minutes = rng.integers(0, 60, size=len(records))
    seconds = rng.integers(0, 60, size=len(records))
    out = []
    for rec, m, s in zip(records, minutes, seconds):
        hour_floor = rec.timestamp - rec.timestamp % 3600
        out.append(TransactionRecord(rec.entity_id, hour_floor + 60 * int(m) + int(s)))
    return out


def group_by_entity_day(records: Iterable[TransactionRecord]) -> list[DataCollection]:
    """Group records into one DataCollection per (entity, UTC day) pair.

    Days with no records produce no collection.  Output order is sorted by
    (entity_id, day) and events ascending, so the result does not depend on
    input record order.
    """
    buckets: dict[tuple[str, date], list[int]] = {}
    for rec in records:
        day = _EPOCH + timedelta(days=rec.timestamp // SECONDS_PER_DAY)
        buckets.setdefault((rec.entity_id, day), []).append(rec.timestamp % SECONDS_PER_DAY)
    return [
        DataCollection(entity, day, tuple(sorted(events)))
        for (entity, day), events in sorted(buckets.items())
    ]


def day_to_epoch(day: date) -> int:
    """Epoch seconds at UTC midnight of the given date."""
    return (day - _EPOCH).days * SECONDS_PER_DAY
