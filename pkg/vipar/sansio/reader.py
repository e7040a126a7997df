from __future__ import annotations

import datetime
from typing import Iterator, List, Union

from vipar.sansio import normalize
from vipar.sansio._parser import RecordParser
from vipar.sansio.constants import CIRV_HEADER, EVENT_HEADER, NOT_ENOUGH_DATA
from vipar.sansio.events import CirvEntry, EventRecord, Participant, PersonKey
from vipar.sansio.exceptions import RowError, SchemaError
from vipar.sansio.types import CrimeFlag, EventType, Role

__all__ = ("RowReader", "CIRV_SCHEMA")

CIRV_SCHEMA = "cirv"
_CIRV_STATUS = {"active": True, "non_active": False, "non-active": False, "inactive": False}

ParsedT = Union[EventRecord, CirvEntry, RowError]


class RowReader:
    """Turn dataset text into records, one row at a time.

    Text may be fed in any chunking; :py:meth:`gets` returns the next parsed record,
    a :py:class:`~vipar.sansio.exceptions.RowError` for a malformed row (returned, not
    raised), or ``NOT_ENOUGH_DATA`` when more text is needed. A header that does not
    match the declared schema is fatal and raises
    :py:class:`~vipar.sansio.exceptions.SchemaError`.

    Args:
        schema: The event type every row of this dataset must carry, or ``"cirv"``.
        window: Optional ``(start, end)`` dates; rows dated outside are row errors.
        path: Labels errors and the records read.
    """

    __slots__ = ("schema", "window", "path", "_parser", "_header_seen")

    def __init__(
        self,
        schema: EventType | str,
        *,
        window: tuple[datetime.date, datetime.date] | None = None,
        path: str | None = None,
    ):
        self.schema = schema if schema == CIRV_SCHEMA else EventType(schema)
        self.window = window
        self.path = path
        self._parser = RecordParser()
        self._header_seen = False

    @property
    def header_seen(self) -> bool:
        return self._header_seen

    @property
    def header(self) -> tuple[str, ...]:
        return CIRV_HEADER if self.schema == CIRV_SCHEMA else EVENT_HEADER

    def feed(self, data: str):
        self._parser.feed(data)

    def feed_eof(self):
        self._parser.feed_eof()

    def gets(self) -> ParsedT | object:
        res = self._parser.parse_one()
        if res is NOT_ENOUGH_DATA:
            return res
        line, fields = res
        if not self._header_seen:
            self._check_header(fields)
            self._header_seen = True
            return self.gets()
        try:
            if self.schema == CIRV_SCHEMA:
                return self._cirv_row(fields)
            return self._event_row(fields, line)
        except _RowProblem as problem:
            return RowError(str(problem), row=line, path=self.path)

    def __iter__(self) -> Iterator[ParsedT]:
        res = self.gets()
        while res is not NOT_ENOUGH_DATA:
            yield res
            res = self.gets()

    def _check_header(self, fields: List[str]):
        got = tuple(f.strip().lower() for f in fields)
        if got != self.header:
            raise SchemaError(
                f"{self.path or 'dataset'}: header {got!r} does not match "
                f"the {getattr(self.schema, 'value', self.schema)!r} schema {self.header!r}"
            )

    def _event_row(self, fields: List[str], line: int) -> EventRecord:
        if len(fields) < 4:
            raise _RowProblem("missing columns")
        event_id, event_type, date, flags, *cells = fields
        event_id = event_id.strip()
        if not event_id:
            raise _RowProblem("missing event id")
        try:
            etype = EventType(event_type.strip().lower())
        except ValueError:
            raise _RowProblem(f"unknown event type {event_type!r}") from None
        if etype is not self.schema:
            raise _RowProblem(
                f"event type {etype.value!r} does not belong in the "
                f"{self.schema.value!r} dataset"
            )
        try:
            when = normalize.parse_date(date)
        except ValueError:
            raise _RowProblem("invalid date") from None
        if self.window and not self.window[0] <= when <= self.window[1]:
            raise _RowProblem("date outside study window")
        try:
            crime_flags = normalize.parse_flags(flags)
        except ValueError:
            raise _RowProblem(f"unknown crime flag in {flags!r}") from None
        participants = [_participant(c) for c in cells if c.strip()]
        if not participants:
            raise _RowProblem("no participants")
        return EventRecord(
            event_id=event_id,
            event_type=etype,
            date=when,
            crime_flags=crime_flags,
            participants=participants,
            path=self.path,
            row=line,
        )

    def _cirv_row(self, fields: List[str]) -> CirvEntry:
        if len(fields) < 3 or not fields[2].strip():
            raise _RowProblem("missing active flag")
        name, dob, status = fields[:3]
        status = status.strip().lower()
        if status not in _CIRV_STATUS:
            raise _RowProblem(f"unknown status {status!r}")
        return CirvEntry(key=_key(name, dob), active=_CIRV_STATUS[status])


class _RowProblem(Exception):
    pass


def _participant(cell: str) -> Participant:
    parts = cell.rsplit(",", 2)
    if len(parts) != 3:
        raise _RowProblem(f"malformed participant {cell!r}")
    name, dob, role = parts
    try:
        prole = Role(role.strip().lower())
    except ValueError:
        raise _RowProblem(f"unknown role {role.strip()!r}") from None
    return Participant(key=_key(name, dob), role=prole)


def _key(name: str, dob: str) -> PersonKey:
    try:
        birth = normalize.parse_optional_date(dob)
    except ValueError:
        raise _RowProblem("invalid date of birth") from None
    try:
        return PersonKey(full_name=name, dob=birth)
    except ValueError:
        raise _RowProblem("missing name") from None
