from __future__ import annotations

import csv
from typing import Iterator, List, Tuple

from vipar.sansio.constants import NOT_ENOUGH_DATA


class RecordParser:
    """A pure-Python, incremental framer for RFC-4180 style CSV text.

    Text arrives in arbitrary chunks through :py:meth:`feed`. A record is complete once
    it ends in a newline *outside* a quoted field, which is the case exactly when the
    record text holds an even number of quote characters (an escaped quote ``""``
    counts twice). Complete records are split into fields with :py:mod:`csv`.

    Note:
        The trailing record of a file may lack a final newline; call
        :py:meth:`feed_eof` so it is released.
    """

    __slots__ = ("buf", "pos", "line", "eof", "_pending", "_pending_line")

    def __init__(self):
        self.buf: str = ""
        self.pos: int = 0
        self.line: int = 0
        self.eof: bool = False
        self._pending: List[str] = []
        self._pending_line: int = 0

    def feed(self, data: str):
        if self.pos:
            self.buf = self.buf[self.pos :]
            self.pos = 0
        self.buf += data

    def feed_eof(self):
        self.eof = True

    def parse_one(self) -> Tuple[int, List[str]] | object:
        """Return ``(line_number, fields)`` for the next record, or the sentinel."""
        while True:
            offset = self.buf.find("\n", self.pos)
            if offset < 0:
                return self._drain()
            chunk = self.buf[self.pos : offset + 1]
            self.pos = offset + 1
            self.line += 1
            if not self._pending:
                self._pending_line = self.line
            self._pending.append(chunk)
            text = "".join(self._pending)
            if text.count('"') % 2 == 0:
                self._pending.clear()
                if not text.strip():
                    continue
                return self._pending_line, _split(text)

    def _drain(self):
        if not self.eof:
            return NOT_ENOUGH_DATA
        rest = self.buf[self.pos :]
        self.pos = len(self.buf)
        if rest:
            self.line += 1
            if not self._pending:
                self._pending_line = self.line
            self._pending.append(rest)
        if not self._pending:
            return NOT_ENOUGH_DATA
        text = "".join(self._pending)
        self._pending.clear()
        if not text.strip():
            return NOT_ENOUGH_DATA
        return self._pending_line, _split(text)

    def __iter__(self) -> Iterator[Tuple[int, List[str]]]:
        res = self.parse_one()
        while res is not NOT_ENOUGH_DATA:
            yield res
            res = self.parse_one()


def _split(text: str) -> List[str]:
    return next(csv.reader([text.rstrip("\r\n")]), [])
