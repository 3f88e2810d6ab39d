"""Date sequence formats, per-head token alphabets and label conversion.

A date is predicted by a fixed set of independent classification heads::

    Day1   {1, 2, 3, MISSING}
    Day2   {0..9, MISSING}
    Month  {1..12, MISSING, WILDCARD}
    Year1..Year4   {0..9, MISSING}

``DDM`` uses the first three heads, ``DDMYY`` adds Year3/Year4 (the last two
year digits) and ``DDMYYYY`` uses all seven.  Class indices follow the
alphabet order above, so for Day1 the digit "1" is index 0 and MISSING is
index 3.

The canonical human-readable form is ``D[D]-M[M]-[Y][Y][Y]Y`` with missing
parts elided, e.g. ``"28-8-33"``, ``"5-10"`` or ``"-8-33"`` (day missing).  An
all-missing label formats to the empty string.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import FormatMismatch, OutOfAlphabet

MISSING = "_"
WILDCARD = "="

DIGITS = tuple(str(d) for d in range(10))


@dataclass(frozen=True)
class HeadSpec:
    """One classification head: its name, class alphabet and label smoothing."""

    name: str
    alphabet: tuple[str, ...]
    smoothing_alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.smoothing_alpha < 1.0:
            raise ValueError(f"smoothing_alpha must be in [0, 1), got {self.smoothing_alpha}")
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise ValueError(f"head {self.name!r} needs a non-empty alphabet of distinct symbols")

    @property
    def class_count(self) -> int:
        return len(self.alphabet)

    def index(self, symbol: str) -> int:
        try:
            return self.alphabet.index(symbol)
        except ValueError:
            raise OutOfAlphabet(f"{symbol!r} is not in the {self.name} alphabet") from None

    @property
    def missing_index(self) -> int:
        return self.index(MISSING)

    def with_smoothing(self, alpha: float) -> "HeadSpec":
        return replace(self, smoothing_alpha=alpha)


DAY1 = HeadSpec("Day1", ("1", "2", "3", MISSING))
DAY2 = HeadSpec("Day2", DIGITS + (MISSING,))
MONTH = HeadSpec("Month", tuple(str(m) for m in range(1, 13)) + (MISSING, WILDCARD))
YEAR1 = HeadSpec("Year1", DIGITS + (MISSING,))
YEAR2 = HeadSpec("Year2", DIGITS + (MISSING,))
YEAR3 = HeadSpec("Year3", DIGITS + (MISSING,))
YEAR4 = HeadSpec("Year4", DIGITS + (MISSING,))

_ALL_DATE_HEADS = (DAY1, DAY2, MONTH, YEAR1, YEAR2, YEAR3, YEAR4)


class SequenceFormat(enum.Enum):
    DDM = "DDM"
    DDMYY = "DDMYY"
    DDMYYYY = "DDMYYYY"

    @property
    def head_count(self) -> int:
        return {"DDM": 3, "DDMYY": 5, "DDMYYYY": 7}[self.value]

    @property
    def year_digits(self) -> int:
        return self.head_count - 3

    def heads(self, smoothing: float = 0.0) -> tuple[HeadSpec, ...]:
        """Head specs for this format, optionally with a shared smoothing alpha."""
        return _format_heads(self, float(smoothing))

    @property
    def head_names(self) -> tuple[str, ...]:
        return tuple(h.name for h in self.heads())

    @classmethod
    def parse(cls, value: "str | SequenceFormat") -> "SequenceFormat":
        if isinstance(value, SequenceFormat):
            return value
        key = str(value).upper().replace("-", "")
        try:
            return cls(key)
        except ValueError:
            raise FormatMismatch(f"unknown sequence format {value!r}") from None

    @classmethod
    def from_heads(cls, heads: Sequence[HeadSpec]) -> "SequenceFormat | None":
        """The date format whose heads match ``heads`` (ignoring smoothing), else None."""
        sig = tuple((h.name, h.alphabet) for h in heads)
        for fmt in cls:
            if sig == tuple((h.name, h.alphabet) for h in fmt.heads()):
                return fmt
        return None


@functools.lru_cache(maxsize=None)
def _format_heads(fmt: SequenceFormat, smoothing: float) -> tuple[HeadSpec, ...]:
    if fmt is SequenceFormat.DDM:
        heads = (DAY1, DAY2, MONTH)
    elif fmt is SequenceFormat.DDMYY:
        heads = (DAY1, DAY2, MONTH, YEAR3, YEAR4)
    else:
        heads = _ALL_DATE_HEADS
    return tuple(h.with_smoothing(smoothing) for h in heads)


@dataclass(frozen=True)
class TokenLabel:
    """A date as one class index per head of ``fmt``."""

    fmt: SequenceFormat
    tokens: tuple[int, ...]

    def __post_init__(self):
        heads = self.fmt.heads()
        if len(self.tokens) != len(heads):
            raise FormatMismatch(
                f"{self.fmt.value} needs {len(heads)} tokens, got {len(self.tokens)}"
            )
        for head, tok in zip(heads, self.tokens):
            if not 0 <= int(tok) < head.class_count:
                raise OutOfAlphabet(f"index {tok} out of range for head {head.name}")
        object.__setattr__(self, "tokens", tuple(int(t) for t in self.tokens))

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(h.alphabet[t] for h, t in zip(self.fmt.heads(), self.tokens))

    @classmethod
    def from_symbols(cls, fmt: SequenceFormat, symbols: Sequence[str]) -> "TokenLabel":
        heads = fmt.heads()
        if len(symbols) != len(heads):
            raise FormatMismatch(f"{fmt.value} needs {len(heads)} symbols, got {len(symbols)}")
        return cls(fmt, tuple(h.index(s) for h, s in zip(heads, symbols)))

    @classmethod
    def empty(cls, fmt: SequenceFormat) -> "TokenLabel":
        return cls(fmt, tuple(h.missing_index for h in fmt.heads()))

    @property
    def is_empty(self) -> bool:
        return all(s == MISSING for s in self.symbols)

    def __str__(self) -> str:
        return format_label(self)


def _clean(value) -> str:
    return "" if value is None else str(value).strip()


def _right_align(digits: str, width: int, field: str) -> list[str]:
    if len(digits) > width:
        raise FormatMismatch(f"{field} {digits!r} has more than {width} digits")
    return [MISSING] * (width - len(digits)) + list(digits)


def parse_label(day, month, year, fmt: SequenceFormat) -> TokenLabel:
    """Build a :class:`TokenLabel` from day/month/year field strings.

    Empty fields become MISSING; ``"="`` in the month field is the wildcard
    ("same as above") token.  Digits are right-aligned within their head
    group, so ``"5"`` as a day is ``[MISSING, 5]`` and a year ``"3"`` in
    ``DDMYY`` is ``[MISSING, 3]``.  A leading zero on the day (``"05"``) maps
    Day1 to MISSING since Day1 has no zero class.
    """
    fmt = SequenceFormat.parse(fmt)
    day, month, year = _clean(day), _clean(month), _clean(year)

    if day == "":
        day_syms = [MISSING, MISSING]
    else:
        if not day.isdigit() or len(day) > 2:
            raise OutOfAlphabet(f"day {day!r} is not 1-2 digits")
        value = int(day)
        if not 1 <= value <= 31:
            raise OutOfAlphabet(f"day {day!r} outside 1..31")
        day_syms = [MISSING, str(value)] if value < 10 else list(str(value))

    if month == "":
        month_sym = MISSING
    elif month == WILDCARD:
        month_sym = WILDCARD
    else:
        if not month.isdigit() or len(month) > 2:
            raise OutOfAlphabet(f"month {month!r} is not 1-2 digits")
        value = int(month)
        if not 1 <= value <= 12:
            raise OutOfAlphabet(f"month {month!r} outside 1..12")
        month_sym = str(value)

    width = fmt.year_digits
    if year and width == 0:
        raise FormatMismatch(f"{fmt.value} has no year heads but year {year!r} was given")
    if year and not year.isdigit():
        raise OutOfAlphabet(f"year {year!r} is not numeric")
    year_syms = _right_align(year, width, "year")

    return TokenLabel.from_symbols(fmt, day_syms + [month_sym] + year_syms)


def label_parts(label: TokenLabel) -> tuple[str, str, str]:
    """The (day, month, year) field strings of a label, missing digits elided."""
    syms = label.symbols
    day = "".join(s for s in syms[:2] if s != MISSING)
    month = "" if syms[2] == MISSING else syms[2]
    year = "".join(s for s in syms[3:] if s != MISSING)
    return day, month, year


def format_label(label: TokenLabel, fmt: SequenceFormat | None = None) -> str:
    """Canonical ``D-M-Y`` string for ``label``; all-missing gives ``""``."""
    if fmt is not None and SequenceFormat.parse(fmt) is not label.fmt:
        raise FormatMismatch(f"label is {label.fmt.value}, not {SequenceFormat.parse(fmt).value}")
    if label.is_empty:
        return ""
    day, month, year = label_parts(label)
    if label.fmt.year_digits == 0:
        return f"{day}-{month}"
    return f"{day}-{month}-{year}"


def parse_date_string(text: str, fmt: SequenceFormat) -> TokenLabel:
    """Inverse of :func:`format_label` for canonical strings."""
    fmt = SequenceFormat.parse(fmt)
    text = _clean(text)
    if text == "":
        return TokenLabel.empty(fmt)
    parts = text.split("-")
    if len(parts) == 2:
        parts.append("")
    if len(parts) != 3:
        raise FormatMismatch(f"date string {text!r} is not D-M or D-M-Y")
    return parse_label(parts[0], parts[1], parts[2], fmt)


def is_canonical(label: TokenLabel) -> bool:
    """True when ``label`` survives a format/parse round trip unchanged."""
    try:
        return parse_date_string(format_label(label), label.fmt) == label
    except (OutOfAlphabet, FormatMismatch):
        return False


def project_label(label: TokenLabel, source: SequenceFormat, target: SequenceFormat) -> TokenLabel:
    """Re-express ``label`` in another format.

    Shrinking drops the leading (century) year heads first; growing pads the
    new year heads with MISSING.
    """
    source, target = SequenceFormat.parse(source), SequenceFormat.parse(target)
    if label.fmt is not source:
        raise FormatMismatch(f"label is {label.fmt.value}, not {source.value}")
    if source is target:
        return label
    syms = list(label.symbols)
    years = syms[3:]
    width = target.year_digits
    if width <= len(years):
        years = years[len(years) - width:]
    else:
        years = [MISSING] * (width - len(years)) + years
    return TokenLabel.from_symbols(target, syms[:3] + years)


def decomposed_groups(fmt: SequenceFormat) -> dict[str, slice]:
    """Head index ranges for the day / month / year accuracy groups."""
    groups = {"day": slice(0, 2), "month": slice(2, 3)}
    if fmt.year_digits:
        groups["year"] = slice(3, fmt.head_count)
    return groups
