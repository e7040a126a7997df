from __future__ import annotations

import datetime
import enum
from typing import Dict, Mapping, Tuple, Union


class EventType(str, enum.Enum):
    ARREST = "arrest"
    FIELD_INTERVIEW = "field_interview"
    OFFENSE = "offense"
    VICTIMIZATION = "victimization"
    SHOOTING = "shooting"


class CrimeFlag(str, enum.Enum):
    VIOLENT = "violent"
    MISDEMEANOR = "misdemeanor"
    FIREARM = "firearm"
    SHOOTING = "shooting"


class Role(str, enum.Enum):
    SUSPECT = "suspect"
    VICTIM = "victim"
    ARRESTEE = "arrestee"
    STOPPED = "stopped"


class CirvStatus(str, enum.Enum):
    NONE = "none"
    ACTIVE = "active"
    NON_ACTIVE = "non_active"


class Category(str, enum.Enum):
    PERSONAL = "personal"
    POSITIONAL = "positional"
    STRUCTURAL = "structural"


class Tier(str, enum.Enum):
    ACTIVE = "active"
    NON_ACTIVE = "non-active"
    COMBINED = "combined"


OFFENDER_ROLES = frozenset((Role.SUSPECT, Role.ARRESTEE))
VICTIM_ROLES = frozenset((Role.VICTIM,))
SHOOTING_FLAGS = frozenset((CrimeFlag.VIOLENT, CrimeFlag.FIREARM, CrimeFlag.SHOOTING))
# Flags are written in this order so serialized rows are canonical.
FLAG_ORDER: Tuple[CrimeFlag, ...] = tuple(CrimeFlag)

PersonIdT = int
EventIdT = str
GroupIdT = int
DateT = datetime.date
ParticipationT = Tuple[EventIdT, Role]
ParticipationIndexT = Dict[EventIdT, Tuple[Tuple[PersonIdT, Role], ...]]
RuleInputValueT = Union[int, float, bool, None]
RuleInputsT = Mapping[str, RuleInputValueT]
