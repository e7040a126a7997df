"""Identity resolution: collapse participant slots into persons."""
from __future__ import annotations

import collections
import datetime
import logging
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import attr

from vipar.sansio import normalize
from vipar.sansio.events import CirvEntry, EventRecord, Person, PersonKey
from vipar.sansio.exceptions import RowError
from vipar.sansio.types import CirvStatus, EventIdT, ParticipationIndexT, PersonIdT

logger = logging.getLogger(__name__)

__all__ = (
    "EventStore",
    "apply_cirv",
    "dedupe_cirv",
    "dedupe_events",
    "resolve_persons",
)


def dedupe_events(
    records: Iterable[EventRecord],
) -> Tuple[List[EventRecord], List[RowError]]:
    """Drop records whose event id was already seen; the first occurrence wins.

    A dropped record is reported at its source file and row when it has one, else at
    its position in ``records``.
    """
    seen: set[EventIdT] = set()
    unique: List[EventRecord] = []
    errors: List[RowError] = []
    for position, record in enumerate(records, start=1):
        if record.event_id in seen:
            errors.append(
                RowError(
                    f"duplicate event id {record.event_id!r}",
                    row=position if record.row is None else record.row,
                    path=record.path,
                )
            )
            continue
        seen.add(record.event_id)
        unique.append(record)
    return unique, errors


def resolve_persons(
    events: Iterable[EventRecord], *, snapshot: datetime.date
) -> Tuple[List[Person], ParticipationIndexT]:
    """Collapse every participant slot into one :py:class:`Person` per distinct key.

    Person ids are dense and assigned in sorted key order, so the result does not
    depend on the order events arrive in. Every slot becomes exactly one
    participation, so no participation is lost or duplicated.

    Args:
        events: Parsed events with unique ids.
        snapshot: The date ages are computed at.

    Returns:
        The persons ordered by id, and an index from event id to its
        ``(person_id, role)`` slots in row order.
    """
    ordered = sorted(events, key=lambda e: (e.date, e.event_id))
    keys = sorted(
        {p.key for e in ordered for p in e.participants}, key=PersonKey.sort_key
    )
    ids: Dict[PersonKey, PersonIdT] = {k: i for i, k in enumerate(keys)}
    participations: Dict[PersonIdT, list] = collections.defaultdict(list)
    index: ParticipationIndexT = {}
    for event in ordered:
        slots = tuple((ids[p.key], p.role) for p in event.participants)
        index[event.event_id] = slots
        for pid, role in slots:
            participations[pid].append((event.event_id, role))

    persons = [
        Person(
            person_id=pid,
            key=key,
            age_at_snapshot=(
                normalize.years_between(key.dob, snapshot) if key.dob else None
            ),
            participations=participations[pid],
        )
        for pid, key in enumerate(keys)
    ]
    logger.info(
        "Resolved %d participant slots into %d persons.",
        sum(len(s) for s in index.values()),
        len(persons),
    )
    return persons, index


def dedupe_cirv(entries: Iterable[CirvEntry]) -> List[CirvEntry]:
    """Collapse duplicate keys; an active row dominates a non-active one."""
    merged: Dict[PersonKey, bool] = {}
    for entry in entries:
        merged[entry.key] = merged.get(entry.key, False) or entry.active
    return [CirvEntry(key=k, active=a) for k, a in merged.items()]


def apply_cirv(persons: Sequence[Person], roster: Iterable[CirvEntry]) -> int:
    """Set ``cirv_status`` on every person whose key is on the roster.

    Returns:
        The number of roster entries found in the network.
    """
    status = {
        e.key: CirvStatus.ACTIVE if e.active else CirvStatus.NON_ACTIVE
        for e in dedupe_cirv(roster)
    }
    found = 0
    for person in persons:
        person.cirv_status = status.get(person.key, CirvStatus.NONE)
        found += person.cirv_status is not CirvStatus.NONE
    return found


@attr.define(kw_only=True)
class EventStore:
    """The unified, read-only view over every parsed dataset."""

    __hash__ = None

    events: Tuple[EventRecord, ...]
    persons: Tuple[Person, ...]
    index: ParticipationIndexT
    cirv: Tuple[CirvEntry, ...] = ()
    snapshot: datetime.date
    events_by_id: Mapping[EventIdT, EventRecord] = attr.field(init=False)
    by_key: Mapping[PersonKey, PersonIdT] = attr.field(init=False)

    def __attrs_post_init__(self):
        self.events_by_id = {e.event_id: e for e in self.events}
        self.by_key = {p.key: p.person_id for p in self.persons}

    @classmethod
    def build(
        cls,
        events: Iterable[EventRecord],
        *,
        snapshot: datetime.date,
        cirv: Iterable[CirvEntry] = (),
    ) -> EventStore:
        unique, errors = dedupe_events(events)
        for err in errors:
            logger.warning("Dropping record: %s", err)
        persons, index = resolve_persons(unique, snapshot=snapshot)
        roster = tuple(dedupe_cirv(cirv))
        found = apply_cirv(persons, roster)
        logger.info("%d of %d CIRV entries appear in the network.", found, len(roster))
        return cls(
            events=tuple(sorted(unique, key=lambda e: (e.date, e.event_id))),
            persons=tuple(persons),
            index=index,
            cirv=roster,
            snapshot=snapshot,
        )

    def person(self, key: PersonKey) -> Person | None:
        pid = self.by_key.get(key)
        return None if pid is None else self.persons[pid]
