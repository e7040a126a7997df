"""A seeded generator of synthetic police-contact datasets with a planted risk signal."""
from __future__ import annotations

import collections
import datetime
import itertools
import logging
from typing import Dict, List, Tuple

import attr
import numpy as np
from scipy import special

from vipar.sansio import constants
from vipar.sansio.events import CirvEntry, EventRecord, Participant, PersonKey
from vipar.sansio.exceptions import SynthError
from vipar.sansio.types import CrimeFlag, EventType, PersonIdT, Role

logger = logging.getLogger(__name__)

__all__ = ("GroundTruth", "SynthConfig", "SyntheticCorpus", "generate")

_FIRST_NAMES = (
    "AARON ADAM ALEX ANDRE ANTHONY ANTOINE BRANDON BRIAN CALVIN CARLOS CHRIS CORY "
    "DANIEL DARIUS DAVID DEMETRIUS DEREK DESHAWN DEVON DOMINIC ERIC EVAN GARY GREGORY "
    "ISAIAH JAMAL JAMES JASON JEROME JOHN JORDAN JOSE JOSHUA JUAN JUSTIN KEITH KENNETH "
    "KEVIN LAMAR LARRY LUIS MALIK MARCUS MARK MARQUIS MICHAEL NATHAN OMAR PATRICK "
    "QUENTIN RAYMOND ROBERT RONALD SAMUEL SEAN TERRELL THOMAS TREVON TYRONE VICTOR "
    "WILLIAM"
).split()
_LAST_NAMES = (
    "ADAMS ALLEN BAILEY BAKER BELL BROOKS BROWN BRYANT CARTER CLARK COLEMAN COLLINS "
    "COOPER DAVIS EDWARDS EVANS FISHER FOSTER GARCIA GRAY GREEN GRIFFIN HALL HARRIS "
    "HAYES HILL HOWARD HUGHES JACKSON JAMES JENKINS JOHNSON JONES KING LEE LEWIS "
    "LONG MARTIN MILLER MITCHELL MOORE MORGAN MORRIS MURPHY NELSON PARKER PERRY "
    "PHILLIPS PRICE REED RICHARDSON ROBINSON ROSS SANDERS SCOTT SIMMONS SMITH "
    "STEWART TAYLOR"
).split()
_INITIALS = tuple("ABCDEFGHIJKLMNOPQRSTUVWXYZ")

# Non-shooting event types with their sampling weights.
_EVENT_MIX = (
    (EventType.OFFENSE, 0.35),
    (EventType.ARREST, 0.30),
    (EventType.FIELD_INTERVIEW, 0.20),
    (EventType.VICTIMIZATION, 0.15),
)
_ID_PREFIX = {
    EventType.OFFENSE: "OFF",
    EventType.VICTIMIZATION: "VIC",
    EventType.ARREST: "ARR",
    EventType.FIELD_INTERVIEW: "FI",
    EventType.SHOOTING: "SHT",
}
# Violence older than this before the cutoff counts for less planted risk.
_RECENT_VIOLENCE_DAYS = 730
_STALE_VIOLENCE_WEIGHT = 0.5


def _non_negative(instance, attribute, value):
    if value < 0:
        raise SynthError(f"{attribute.name} must be non-negative, got {value!r}.")


def _fraction(instance, attribute, value):
    if not 0 <= value <= 1:
        raise SynthError(f"{attribute.name} must lie in [0, 1], got {value!r}.")


def _propensities(value):
    return None if value is None else tuple(float(v) for v in value)


@attr.frozen(kw_only=True)
class SynthConfig:
    """Parameters of a synthetic corpus. Every field has a small-city default."""

    seed: int = 0
    n_persons: int = attr.field(default=10_000, validator=_non_negative)
    n_groups: int = attr.field(default=1_200, validator=_non_negative)
    group_size_mean: float = attr.field(default=4.0, validator=_non_negative)
    """Mean group size; sizes are ``1 + Poisson(mean - 1)``."""
    event_rate: float = attr.field(default=0.5, validator=_non_negative)
    """Events initiated per person-year before the cutoff."""
    violence_propensity: Tuple[float, ...] | None = attr.field(
        default=None, converter=_propensities
    )
    """One value in [0, 1] per group; drawn from Beta(1.2, 4) when absent."""
    age_mean: float = attr.field(default=28.0, validator=_non_negative)
    age_sd: float = attr.field(default=9.0, validator=_non_negative)
    age_min: float = attr.field(default=13.0, validator=_non_negative)
    age_max: float = attr.field(default=75.0, validator=_non_negative)
    start: datetime.date = constants.STUDY_START
    cutoff: datetime.date = constants.STUDY_CUTOFF
    end: datetime.date = constants.STUDY_END
    cirv_fraction: float = attr.field(default=0.06, validator=_fraction)
    cirv_active_fraction: float = attr.field(
        default=constants.ACTIVE_TIER_SIZE
        / (constants.ACTIVE_TIER_SIZE + constants.NON_ACTIVE_TIER_SIZE),
        validator=_fraction,
    )
    bridge_rate: float = attr.field(default=0.05, validator=_fraction)
    """Chance that an event also involves someone from the partner group, or another
    loner for persons outside any group."""
    missing_dob_fraction: float = attr.field(default=0.02, validator=_fraction)
    suspect_identified_fraction: float = attr.field(default=149 / 477, validator=_fraction)
    """Share of post-cutoff shootings with an identified suspect."""
    outcome_intercept: float = -9.0
    outcome_slope: float = attr.field(default=4.0, validator=_non_negative)

    def __attrs_post_init__(self):
        if not self.start < self.cutoff < self.end:
            raise SynthError(
                f"Study window must satisfy start < cutoff < end, "
                f"got {self.start}, {self.cutoff}, {self.end}."
            )
        if self.age_min > self.age_max:
            raise SynthError("age_min must not exceed age_max.")
        if self.n_groups and self.group_size_mean < 1:
            raise SynthError("group_size_mean must be at least 1.")
        if self.n_groups * self.group_size_mean > self.n_persons:
            raise SynthError(
                f"{self.n_groups:,} groups of mean size {self.group_size_mean} "
                f"exceed the population of {self.n_persons:,}."
            )
        if self.n_persons > len(_FIRST_NAMES) * len(_INITIALS) * len(_LAST_NAMES):
            raise SynthError(f"Cannot draw {self.n_persons:,} unique names.")
        if self.violence_propensity is not None:
            if len(self.violence_propensity) != self.n_groups:
                raise SynthError(
                    f"Expected {self.n_groups} violence propensities, "
                    f"got {len(self.violence_propensity)}."
                )
            if not all(0 <= v <= 1 for v in self.violence_propensity):
                raise SynthError("Violence propensities must lie in [0, 1].")

    @classmethod
    def city_scale(cls, seed: int = 0) -> SynthConfig:
        """A population the size of a mid-sized city's five years of police contacts."""
        return cls(seed=seed, n_persons=55_454, n_groups=6_500, group_size_mean=4.0)


@attr.frozen(kw_only=True)
class GroundTruth:
    person_id: PersonIdT
    """The generator's own index, unrelated to ids assigned at ingest."""
    key: PersonKey
    planted_risk: float


@attr.frozen(kw_only=True)
class SyntheticCorpus:
    config: SynthConfig
    events: Dict[EventType, Tuple[EventRecord, ...]]
    cirv: Tuple[CirvEntry, ...]
    ground_truth: Tuple[GroundTruth, ...]

    def all_events(self) -> List[EventRecord]:
        return [e for t in EventType for e in self.events.get(t, ())]


class _Builder:
    """Accumulates events with per-dataset sequential ids."""

    __slots__ = ("keys", "events", "counters")

    def __init__(self, keys: List[PersonKey]):
        self.keys = keys
        self.events: Dict[EventType, List[EventRecord]] = collections.defaultdict(list)
        self.counters = collections.Counter()

    def add(self, etype, date, flags, slots: List[Tuple[int, Role]]):
        self.counters[etype] += 1
        self.events[etype].append(
            EventRecord(
                event_id=f"{_ID_PREFIX[etype]}-{self.counters[etype]:07d}",
                event_type=etype,
                date=date,
                crime_flags=flags,
                participants=[
                    Participant(key=self.keys[i], role=role) for i, role in slots
                ],
            )
        )


def _random_date(rng, start: datetime.date, end: datetime.date) -> datetime.date:
    return start + datetime.timedelta(days=int(rng.integers(0, (end - start).days + 1)))


def generate(config: SynthConfig) -> SyntheticCorpus:
    """Draw a complete synthetic corpus from one seeded random stream.

    Persons belong to co-offending groups; events are drawn inside groups with
    occasional bridges to a partner group of similar violence propensity. Each
    person's planted risk is youth plus their group's violence propensity plus prior
    violence, with violence from the last two years before the cutoff counting double.
    Post-cutoff shootings strike with probability logistic in that risk. Persons in a
    group with zero propensity are never involved in a shooting.

    Raises:
        SynthError: The configuration cannot be realized.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_persons
    if not n:
        raise SynthError("Cannot generate a corpus without persons.")

    # Population.
    name_ids = rng.choice(
        len(_FIRST_NAMES) * len(_INITIALS) * len(_LAST_NAMES), size=n, replace=False
    )
    ages = np.clip(
        rng.normal(config.age_mean, config.age_sd, size=n),
        config.age_min,
        config.age_max,
    )
    missing_dob = rng.random(n) < config.missing_dob_fraction
    keys = []
    for i in range(n):
        first, rest = divmod(int(name_ids[i]), len(_INITIALS) * len(_LAST_NAMES))
        initial, last = divmod(rest, len(_LAST_NAMES))
        dob = None
        if not missing_dob[i]:
            dob = config.cutoff - datetime.timedelta(
                days=int(ages[i] * constants.DAYS_PER_YEAR)
            )
        keys.append(
            PersonKey(
                full_name=f"{_FIRST_NAMES[first]} {_INITIALS[initial]} {_LAST_NAMES[last]}",
                dob=dob,
            )
        )

    # Groups: the first persons fill the groups in order; the rest are loners.
    sizes = 1 + rng.poisson(max(config.group_size_mean - 1, 0), size=config.n_groups)
    membership = np.full(n, -1)
    members: List[np.ndarray] = []
    placed = 0
    order = rng.permutation(n)
    for g, size in enumerate(sizes):
        chosen = order[placed : placed + int(size)]
        membership[chosen] = g
        members.append(chosen)
        placed += len(chosen)
    if config.violence_propensity is None:
        group_propensity = rng.beta(1.2, 4.0, size=config.n_groups)
    else:
        group_propensity = np.asarray(config.violence_propensity, dtype=float)
    loner_propensity = float(group_propensity.mean()) if config.n_groups else 0.0
    propensity = np.where(
        membership >= 0,
        group_propensity[np.maximum(membership, 0)] if config.n_groups else 0.0,
        loner_propensity,
    )
    partner = _partners(group_propensity)
    loners = np.flatnonzero(membership < 0)

    builder = _Builder(keys)
    types = [t for t, _ in _EVENT_MIX]
    weights = np.array([w for _, w in _EVENT_MIX])
    years = (config.cutoff - config.start).days / constants.DAYS_PER_YEAR
    violent_count = np.zeros(n)

    # Pre-cutoff events, initiated by each person in turn.
    for person in range(n):
        group = membership[person]
        mates = members[group] if group >= 0 else np.empty(0, dtype=int)
        mates = mates[mates != person]
        allies = loners
        if group >= 0 and partner[group] >= 0:
            allies = members[partner[group]]
        for _ in range(int(rng.poisson(config.event_rate * years))):
            slots = [person]
            if len(mates):
                k = int(rng.binomial(min(3, len(mates)), 0.4))
                slots.extend(int(m) for m in rng.choice(mates, size=k, replace=False))
            if rng.random() < config.bridge_rate:
                other = int(rng.choice(allies)) if len(allies) else person
                if other not in slots:
                    slots.append(other)
            etype = types[int(rng.choice(len(types), p=weights))]
            p = propensity[person]
            violent = rng.random() < 0.1 + 0.5 * p
            flags = set()
            if violent:
                flags.add(CrimeFlag.VIOLENT)
                if rng.random() < 0.1 + 0.5 * p:
                    flags.add(CrimeFlag.FIREARM)
            elif rng.random() < 0.5:
                flags.add(CrimeFlag.MISDEMEANOR)
            if etype is EventType.FIELD_INTERVIEW:
                flags.clear()
            roles = _roles(etype, len(slots))
            date = _random_date(rng, config.start, config.cutoff)
            builder.add(etype, date, flags, list(zip(slots, roles)))
            if CrimeFlag.VIOLENT in flags:
                violent_count[slots] += _violence_weight(date, config.cutoff)

    youth = np.clip(constants.AGE_CONSTANT - ages / constants.AGE_DIVISOR, 0, 7) / 7
    base_risk = youth + propensity

    # Pre-cutoff shootings feed the network's shooting flags.
    prior = special.expit(config.outcome_intercept + config.outcome_slope * base_risk)
    prior = 1 - (1 - prior) ** years
    _shootings(
        rng,
        builder,
        config,
        members,
        membership,
        propensity,
        prior,
        start=config.start,
        end=config.cutoff,
        violent_count=violent_count,
    )

    risk = base_risk + np.minimum(violent_count / 3, 1.0)
    outcome = special.expit(config.outcome_intercept + config.outcome_slope * risk)
    _shootings(
        rng,
        builder,
        config,
        members,
        membership,
        propensity,
        outcome,
        start=config.cutoff + datetime.timedelta(days=1),
        end=config.end,
    )

    # CIRV list, drawn towards the risky end of the population.
    n_cirv = int(round(config.cirv_fraction * n))
    cirv: List[CirvEntry] = []
    if n_cirv:
        weight = risk + 0.05
        chosen = rng.choice(n, size=n_cirv, replace=False, p=weight / weight.sum())
        chosen = sorted(chosen, key=lambda i: (-risk[i], int(i)))
        n_active = int(round(config.cirv_active_fraction * n_cirv))
        cirv = [
            CirvEntry(key=keys[int(i)], active=rank < n_active)
            for rank, i in enumerate(chosen)
        ]

    truth = tuple(
        GroundTruth(person_id=i, key=keys[i], planted_risk=round(float(risk[i]), 6))
        for i in range(n)
    )
    events = {t: tuple(builder.events.get(t, ())) for t in EventType}
    logger.info(
        "Generated %d persons, %d events (%d shootings), %d CIRV entries.",
        n,
        sum(len(v) for v in events.values()),
        len(events[EventType.SHOOTING]),
        len(cirv),
    )
    return SyntheticCorpus(
        config=config, events=events, cirv=tuple(cirv), ground_truth=truth
    )


def _partners(propensity: np.ndarray) -> np.ndarray:
    """Pair each group with its neighbor in propensity order; -1 for the odd one out."""
    partner = np.full(len(propensity), -1)
    order = np.argsort(propensity, kind="stable")
    for a, b in zip(order[0::2], order[1::2]):
        partner[a], partner[b] = b, a
    return partner


def _violence_weight(date: datetime.date, cutoff: datetime.date) -> float:
    if (cutoff - date).days < _RECENT_VIOLENCE_DAYS:
        return 1.0
    return _STALE_VIOLENCE_WEIGHT


def _roles(etype: EventType, count: int) -> List[Role]:
    if etype is EventType.ARREST:
        return [Role.ARRESTEE] * count
    if etype is EventType.FIELD_INTERVIEW:
        return [Role.STOPPED] * count
    if etype is EventType.VICTIMIZATION:
        return [Role.VICTIM] + [Role.SUSPECT] * (count - 1)
    return [Role.SUSPECT] * count


def _shootings(
    rng,
    builder: _Builder,
    config: SynthConfig,
    members: List[np.ndarray],
    membership: np.ndarray,
    propensity: np.ndarray,
    probability: np.ndarray,
    *,
    start: datetime.date,
    end: datetime.date,
    violent_count: np.ndarray | None = None,
):
    """One shooting per struck person, with a suspect some of the time."""
    struck = (rng.random(len(probability)) < probability) & (propensity > 0)
    for victim in itertools.compress(range(len(probability)), struck):
        slots = [(victim, Role.VICTIM)]
        if rng.random() < config.suspect_identified_fraction:
            group = membership[victim]
            pool = members[group] if group >= 0 else np.empty(0, dtype=int)
            pool = pool[(pool != victim) & (propensity[pool] > 0)]
            if len(pool):
                slots.append((int(rng.choice(pool)), Role.SUSPECT))
        date = _random_date(rng, start, end)
        builder.add(
            EventType.SHOOTING,
            date,
            {CrimeFlag.VIOLENT, CrimeFlag.FIREARM, CrimeFlag.SHOOTING},
            slots,
        )
        if violent_count is not None:
            weight = _violence_weight(date, config.cutoff)
            violent_count[[p for p, _ in slots]] += weight
