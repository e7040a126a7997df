from __future__ import annotations

import datetime
from typing import Tuple

import attr

from vipar.sansio import normalize
from vipar.sansio.types import (
    SHOOTING_FLAGS,
    CirvStatus,
    CrimeFlag,
    EventType,
    ParticipationT,
    PersonIdT,
    Role,
)


def _normalized_name(value: str) -> str:
    name = normalize.normalize_name(value)
    if not name:
        raise ValueError("full_name must be non-empty")
    return name


@attr.frozen(kw_only=True)
class PersonKey:
    """The identity of a person across datasets: a normalized name and a date of birth.

    Two keys are the same person iff both fields match exactly.
    """

    full_name: str = attr.field(converter=_normalized_name)
    """Uppercase, punctuation-free, single-spaced full name."""
    dob: datetime.date | None = None
    """Date of birth, when the source recorded one."""

    @property
    def matchable(self) -> bool:
        """Only keys with a date of birth can be matched against outcomes."""
        return self.dob is not None

    def sort_key(self) -> Tuple[str, str]:
        return self.full_name, normalize.format_date(self.dob)


@attr.frozen(kw_only=True)
class Participant:
    key: PersonKey
    role: Role


def _check_participants(instance, attribute, value):
    if not value:
        raise ValueError("no participants")


@attr.frozen(kw_only=True)
class EventRecord:
    """One police contact: an arrest, field interview, offense, victimization or shooting.

    Shootings always carry the violent, firearm and shooting flags; the converter adds
    any that the source row left out.
    """

    event_id: str
    event_type: EventType = attr.field(converter=EventType)
    date: datetime.date
    crime_flags: frozenset = attr.field(converter=frozenset)
    participants: Tuple[Participant, ...] = attr.field(
        converter=tuple, validator=_check_participants
    )
    path: str | None = attr.field(default=None, eq=False, repr=False)
    """The dataset file the record was read from, if any."""
    row: int | None = attr.field(default=None, eq=False, repr=False)

    def __attrs_post_init__(self):
        if self.event_type is EventType.SHOOTING and not SHOOTING_FLAGS <= self.crime_flags:
            object.__setattr__(self, "crime_flags", self.crime_flags | SHOOTING_FLAGS)

    def has(self, flag: CrimeFlag) -> bool:
        return flag in self.crime_flags


@attr.frozen(kw_only=True)
class CirvEntry:
    """A row of the chronic-offender (CIRV) list."""

    key: PersonKey
    active: bool


@attr.define(kw_only=True)
class Person:
    """An identity-resolved individual with every contact they appear in."""

    __hash__ = None

    person_id: PersonIdT
    key: PersonKey
    age_at_snapshot: float | None
    """Age in years, floored to one decimal; ``None`` without a date of birth."""
    participations: list[ParticipationT] = attr.Factory(list)
    """``(event_id, role)`` pairs ordered by event date."""
    cirv_status: CirvStatus = CirvStatus.NONE

    @property
    def on_cirv_list(self) -> bool:
        return self.cirv_status is not CirvStatus.NONE
