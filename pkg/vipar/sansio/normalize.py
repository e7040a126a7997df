from __future__ import annotations

import datetime
import re
from typing import Iterable

from vipar.sansio.constants import FLAG_SEPARATOR
from vipar.sansio.types import FLAG_ORDER, CrimeFlag

_SEPARATORS = re.compile(r"[,\-/_]+")
_PUNCTUATION = re.compile(r"[^\w\s]+")
_WHITESPACE = re.compile(r"\s+")


def normalize_name(name: str) -> str:
    """Uppercase, strip punctuation, trim and collapse internal whitespace.

    Separating punctuation (commas, hyphens, slashes) becomes a space, so
    ``"Doe,  John"`` and ``"DOE JOHN"`` normalize to the same key.
    """
    name = _SEPARATORS.sub(" ", name.upper())
    name = _PUNCTUATION.sub("", name)
    return _WHITESPACE.sub(" ", name).strip()


def parse_date(value: str) -> datetime.date:
    """Parse an ISO-8601 calendar date (YYYY-MM-DD)."""
    value = value.strip()
    if len(value) != 10:
        raise ValueError(f"invalid date {value!r}")
    return datetime.date.fromisoformat(value)


def parse_optional_date(value: str) -> datetime.date | None:
    return parse_date(value) if value.strip() else None


def format_date(value: datetime.date | None) -> str:
    return value.isoformat() if value else ""


def parse_flags(cell: str) -> frozenset[CrimeFlag]:
    return frozenset(
        CrimeFlag(f.strip().lower()) for f in cell.split(FLAG_SEPARATOR) if f.strip()
    )


def format_flags(flags: Iterable[CrimeFlag]) -> str:
    present = set(flags)
    return FLAG_SEPARATOR.join(f.value for f in FLAG_ORDER if f in present)


def _anniversary(start: datetime.date, years: int) -> datetime.date:
    try:
        return start.replace(year=start.year + years)
    except ValueError:
        # February 29th in a common year.
        return start.replace(year=start.year + years, day=28)


def years_between(start: datetime.date, end: datetime.date) -> float:
    """Completed years from ``start`` to ``end`` plus completed tenths of the current
    year, so a birthday always lands on a whole number."""
    if end <= start:
        return 0.0
    years = end.year - start.year - ((end.month, end.day) < (start.month, start.day))
    last = _anniversary(start, years)
    span = (_anniversary(start, years + 1) - last).days
    tenths = (end - last).days * 10 // span
    return (years * 10 + tenths) / 10
