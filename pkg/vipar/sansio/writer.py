from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

from vipar.sansio import normalize
from vipar.sansio.constants import CIRV_HEADER, EVENT_HEADER
from vipar.sansio.events import CirvEntry, EventRecord, Participant


class RowWriter:
    """A Sans-IO 'Writer', which encodes records into CSV text.

    The output is canonical (fixed flag order, ``\\n`` line endings, minimal quoting
    with participant triples always quoted), so reading it back with
    :py:class:`~vipar.sansio.reader.RowReader` reproduces the records exactly.
    """

    __slots__ = ("_buf", "_writer")

    def __init__(self):
        self._buf = io.StringIO()
        self._writer = csv.writer(self._buf, lineterminator="\n")

    def _take(self) -> str:
        out = self._buf.getvalue()
        self._buf.seek(0)
        self._buf.truncate()
        return out

    def pack_header(self, header: Sequence[str]) -> str:
        self._writer.writerow(header)
        return self._take()

    def pack_event(self, record: EventRecord) -> str:
        self._writer.writerow(
            [
                record.event_id,
                record.event_type.value,
                record.date.isoformat(),
                normalize.format_flags(record.crime_flags),
            ]
        )
        line = self._take().rstrip("\n")
        cells = ",".join(_quote(_triple(p)) for p in record.participants)
        return f"{line},{cells}\n"

    def pack_cirv(self, entry: CirvEntry) -> str:
        self._writer.writerow(
            [
                entry.key.full_name,
                normalize.format_date(entry.key.dob),
                "active" if entry.active else "non_active",
            ]
        )
        return self._take()

    def pack_events(self, records: Iterable[EventRecord]) -> str:
        return self.pack_header(EVENT_HEADER) + "".join(
            self.pack_event(r) for r in records
        )

    def pack_cirv_list(self, entries: Iterable[CirvEntry]) -> str:
        return self.pack_header(CIRV_HEADER) + "".join(
            self.pack_cirv(e) for e in entries
        )


def _triple(participant: Participant) -> str:
    key = participant.key
    return f"{key.full_name},{normalize.format_date(key.dob)},{participant.role.value}"


def _quote(cell: str) -> str:
    return '"' + cell.replace('"', '""') + '"'
