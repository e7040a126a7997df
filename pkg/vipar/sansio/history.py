from __future__ import annotations

import datetime
from typing import Mapping

import attr

from vipar.sansio.events import EventRecord, Person
from vipar.sansio.types import OFFENDER_ROLES, VICTIM_ROLES, CrimeFlag, EventIdT


def is_recent(
    date: datetime.date, *, snapshot: datetime.date, recency_days: int
) -> bool:
    """Whether ``date`` falls in ``[snapshot - recency_days, snapshot]``."""
    return 0 <= (snapshot - date).days <= recency_days


@attr.frozen(kw_only=True)
class PersonHistory:
    """Counts of a person's past contacts that feed the personal rules.

    Offending means appearing as a suspect or arrestee; victimization means appearing
    as a victim. Firearm involvement counts any role.
    """

    violent_crimes: int = 0
    recent_violent_crimes: int = 0
    violent_victimizations: int = 0
    recent_violent_victimizations: int = 0
    firearm_incidents: int = 0
    recent_firearm_incidents: int = 0
    misdemeanors_committed: int = 0
    recent_misdemeanors_committed: int = 0
    misdemeanor_victimizations: int = 0
    shootings: int = 0


def summarize_history(
    person: Person,
    events: Mapping[EventIdT, EventRecord],
    *,
    snapshot: datetime.date,
    recency_days: int,
) -> PersonHistory:
    """Count a person's contacts on or before ``snapshot``.

    A person holding two roles in one event (for example suspect and victim) has that
    event counted once per category it qualifies for.
    """
    counts = dict.fromkeys(attr.fields_dict(PersonHistory), 0)
    roles: dict[EventIdT, set] = {}
    for event_id, role in person.participations:
        roles.setdefault(event_id, set()).add(role)

    for event_id, held in roles.items():
        event = events[event_id]
        if event.date > snapshot:
            continue
        recent = is_recent(event.date, snapshot=snapshot, recency_days=recency_days)
        offender = bool(held & OFFENDER_ROLES)
        victim = bool(held & VICTIM_ROLES)
        if event.has(CrimeFlag.VIOLENT):
            if offender:
                counts["violent_crimes"] += 1
                counts["recent_violent_crimes"] += recent
            if victim:
                counts["violent_victimizations"] += 1
                counts["recent_violent_victimizations"] += recent
        if event.has(CrimeFlag.FIREARM):
            counts["firearm_incidents"] += 1
            counts["recent_firearm_incidents"] += recent
        if event.has(CrimeFlag.MISDEMEANOR):
            if offender:
                counts["misdemeanors_committed"] += 1
                counts["recent_misdemeanors_committed"] += recent
            if victim:
                counts["misdemeanor_victimizations"] += 1
        if event.has(CrimeFlag.SHOOTING):
            counts["shootings"] += 1
    return PersonHistory(**counts)
