"""Record types for linking transcriptions to manually keyed records."""
from __future__ import annotations

import csv
import functools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..dates import SequenceFormat, TokenLabel, parse_date_string, project_label
from ..errors import BadCSV, DatelinkError, MissingFile

FIELDS = ("date", "first_name", "last_name")
RECORD_COLUMNS = ("record_id", "region_id", "first_name", "last_name", "birth_date")

# Census ditto conventions ("same as the line above") and blanks never count as agreement.
DITTO_MARKS = frozenset({'"', "=", "do", "do.", "d:o", "ditto", "-"})


@dataclass(frozen=True)
class ManualRecord:
    record_id: str
    region_id: str
    first_name: str
    last_name: str
    birth_date: str

    def __post_init__(self):
        if not str(self.record_id):
            raise ValueError("record_id must be non-empty")
        if not str(self.region_id):
            raise ValueError("region_id must be non-empty")

    def field(self, name: str) -> str:
        return self.birth_date if name == "date" else getattr(self, name)


@dataclass(frozen=True)
class FieldPrediction:
    image_id: str
    region_id: str
    date: str
    first_name: str
    last_name: str
    confidence: dict = field(default_factory=dict, compare=False, hash=False)

    def field(self, name: str) -> str:
        return getattr(self, name)


@dataclass(frozen=True)
class CensusImage:
    """One census row image.

    ``payload`` is whatever the field recognizers consume: pixel arrays
    per field for neural recognizers, or the hidden ground truth for the
    simulation recognizers.  ``index`` is a dense integer id used for
    per-image pseudo-random draws.
    """

    image_id: str
    region_id: str
    index: int
    payload: Any = field(default=None, compare=False, hash=False)


def normalize_name(value: str | None) -> str:
    """Case-fold, trim and collapse internal whitespace."""
    if value is None:
        return ""
    return " ".join(str(value).split()).casefold()


def comparable_name(value: str | None) -> str | None:
    """The normalized name, or ``None`` if the field can never agree (blank or ditto)."""
    norm = normalize_name(value)
    if norm == "" or norm in DITTO_MARKS:
        return None
    return norm


@functools.lru_cache(maxsize=65536)
def comparable_date(value: str | None, fmt: SequenceFormat) -> TokenLabel | None:
    """Parse a ``D-M[-Y]`` string and project it to ``fmt``.

    Strings are read as up-to-four-digit years (right-aligned), so ``28-8-33``
    and ``28-8-1933`` agree once projected to ``DDMYY``.  Unparseable or
    blank dates and all-missing labels never agree.
    """
    text = normalize_name(value)
    if not text or text in DITTO_MARKS:
        return None
    try:
        full = parse_date_string(text, SequenceFormat.DDMYYYY)
    except DatelinkError:
        return None
    label = project_label(full, SequenceFormat.DDMYYYY, fmt)
    return None if label.is_empty else label


def comparable(item, name: str, fmt: SequenceFormat):
    value = item.field(name)
    return comparable_date(value, fmt) if name == "date" else comparable_name(value)


def read_records_csv(path) -> list[ManualRecord]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"records file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        missing = [c for c in RECORD_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise BadCSV(f"{path}: missing columns {missing}")
        records = [ManualRecord(*(row[c] or "" for c in RECORD_COLUMNS)) for row in reader]
    ids = [r.record_id for r in records]
    if len(set(ids)) != len(ids):
        raise BadCSV(f"{path}: duplicate record_id")
    return records


def write_records_csv(records: Iterable[ManualRecord], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow((r.record_id, r.region_id, r.first_name, r.last_name, r.birth_date))
    return path
