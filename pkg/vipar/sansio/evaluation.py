"""Temporal hold-out evaluation of ranked lists against future shootings."""
from __future__ import annotations

import datetime
import decimal
import hashlib
import logging
from typing import Iterable, List, Sequence, Tuple

import attr

from vipar.sansio import constants
from vipar.sansio.events import CirvEntry, EventRecord, PersonKey
from vipar.sansio.exceptions import EvaluationError
from vipar.sansio.identity import dedupe_cirv
from vipar.sansio.types import OFFENDER_ROLES, VICTIM_ROLES, EventType, Tier

logger = logging.getLogger(__name__)

__all__ = (
    "EvaluationReport",
    "HoldOut",
    "ListComparison",
    "cirv_baseline",
    "compare_lists",
    "evaluate_roster",
    "evaluate_tiers",
    "match_and_rate",
    "outcome_digest",
    "temporal_split",
    "tier_reports",
)


@attr.frozen(kw_only=True)
class HoldOut:
    """Events up to the cutoff, and the persons in shootings after it."""

    training: Tuple[EventRecord, ...]
    victims: Tuple[PersonKey, ...]
    suspects: Tuple[PersonKey, ...]
    n_shootings: int


def temporal_split(events: Iterable[EventRecord], cutoff: datetime.date) -> HoldOut:
    """Split events at ``cutoff``, inclusive on the training side.

    Shooting victims and suspects after the cutoff are listed separately, once per
    appearance; :py:func:`match_and_rate` collapses repeats.
    """
    training = []
    victims: List[PersonKey] = []
    suspects: List[PersonKey] = []
    n_shootings = 0
    for event in events:
        if event.date <= cutoff:
            training.append(event)
            continue
        if event.event_type is not EventType.SHOOTING:
            continue
        n_shootings += 1
        for participant in event.participants:
            if participant.role in VICTIM_ROLES:
                victims.append(participant.key)
            elif participant.role in OFFENDER_ROLES:
                suspects.append(participant.key)
    if not n_shootings:
        logger.warning("No shootings after %s; the hold-out is empty.", cutoff)
    logger.info(
        "Split at %s: %d training events, %d hold-out shootings.",
        cutoff,
        len(training),
        n_shootings,
    )
    return HoldOut(
        training=tuple(training),
        victims=tuple(victims),
        suspects=tuple(suspects),
        n_shootings=n_shootings,
    )


def outcome_digest(outcomes: Iterable[PersonKey]) -> str:
    """A fingerprint of a matchable outcome set, independent of order and repeats."""
    keys = sorted({k.sort_key() for k in outcomes if k.matchable})
    digest = hashlib.sha256()
    for name, dob in keys:
        digest.update(f"{name}\x1f{dob}\x1e".encode())
    return digest.hexdigest()


def _rate(hits: int, total: int) -> float:
    if not total:
        return 0.0
    percent = decimal.Decimal(100 * hits) / decimal.Decimal(total)
    return float(percent.quantize(decimal.Decimal("0.1"), decimal.ROUND_HALF_UP))


@attr.frozen(kw_only=True)
class EvaluationReport:
    list_name: str
    tier: Tier = attr.field(converter=Tier)
    n_list: int
    n_outcomes: int
    """Distinct outcome persons with a date of birth."""
    n_hits: int
    n_excluded: int = 0
    """Distinct outcome persons left out of the denominator for lacking a date of birth."""
    outcome_digest: str = attr.field(default="", repr=False)

    @property
    def hit_rate_percent(self) -> float:
        return _rate(self.n_hits, self.n_outcomes)

    def as_dict(self) -> dict:
        out = attr.asdict(self)
        out["tier"] = self.tier.value
        out["hit_rate_percent"] = self.hit_rate_percent
        return out


def match_and_rate(
    predicted: Sequence[PersonKey],
    outcomes: Iterable[PersonKey],
    *,
    list_name: str,
    tier: Tier | str = Tier.COMBINED,
) -> EvaluationReport:
    """Count the outcome persons that appear on a predicted list.

    A hit is an exact match on normalized name and date of birth. Each outcome person
    counts once however many shootings they appear in. Outcomes without a date of birth
    cannot be matched and are excluded from the denominator.
    """
    distinct = set(outcomes)
    matchable = {k for k in distinct if k.matchable}
    hits = matchable.intersection(predicted)
    return EvaluationReport(
        list_name=list_name,
        tier=tier,
        n_list=len(predicted),
        n_outcomes=len(matchable),
        n_hits=len(hits),
        n_excluded=len(distinct) - len(matchable),
        outcome_digest=outcome_digest(matchable),
    )


def evaluate_tiers(
    ranked: Sequence[PersonKey],
    outcomes: Iterable[PersonKey],
    *,
    list_name: str,
    active_n: int = constants.ACTIVE_TIER_SIZE,
    non_active_n: int = constants.NON_ACTIVE_TIER_SIZE,
) -> List[EvaluationReport]:
    """Active, non-active and combined reports for one ranked list."""
    return tier_reports(
        ranked[:active_n],
        ranked[active_n : active_n + non_active_n],
        outcomes,
        list_name=list_name,
    )


def tier_reports(
    active: Sequence[PersonKey],
    non_active: Sequence[PersonKey],
    outcomes: Iterable[PersonKey],
    *,
    list_name: str,
) -> List[EvaluationReport]:
    outcomes = tuple(outcomes)
    reports = [
        match_and_rate(active, outcomes, list_name=list_name, tier=Tier.ACTIVE),
        match_and_rate(non_active, outcomes, list_name=list_name, tier=Tier.NON_ACTIVE),
        match_and_rate(
            list(active) + list(non_active),
            outcomes,
            list_name=list_name,
            tier=Tier.COMBINED,
        ),
    ]
    for report in reports:
        logger.info(
            "%s %s: %d of %d hits (%.1f%%).",
            list_name,
            report.tier.value,
            report.n_hits,
            report.n_outcomes,
            report.hit_rate_percent,
        )
    return reports


def cirv_baseline(
    roster: Iterable[CirvEntry],
) -> Tuple[List[PersonKey], List[PersonKey]]:
    """The CIRV roster split into its active and non-active members, each by key.

    The roster's own status decides the tier; a key listed more than once is active
    if any of its rows is.
    """
    ordered = sorted(dedupe_cirv(roster), key=lambda e: e.key.sort_key())
    return (
        [e.key for e in ordered if e.active],
        [e.key for e in ordered if not e.active],
    )


def evaluate_roster(
    roster: Iterable[CirvEntry], outcomes: Iterable[PersonKey], *, list_name: str
) -> List[EvaluationReport]:
    """Tier reports for the CIRV roster, tiered by each member's status."""
    active, non_active = cirv_baseline(roster)
    return tier_reports(active, non_active, outcomes, list_name=list_name)


@attr.frozen(kw_only=True)
class ListComparison:
    first: str
    second: str
    tier: Tier
    first_rate: float
    second_rate: float
    ratio: float | None
    """``first``'s hit rate over ``second``'s; None when ``second`` has no hits."""

    def as_dict(self) -> dict:
        out = attr.asdict(self)
        out["tier"] = self.tier.value
        return out


def compare_lists(first: EvaluationReport, second: EvaluationReport) -> ListComparison:
    """Compare two reports over the same outcome set.

    Raises:
        EvaluationError: The reports were computed over different outcomes.
    """
    if (first.outcome_digest, first.n_outcomes) != (
        second.outcome_digest,
        second.n_outcomes,
    ):
        raise EvaluationError(
            f"Cannot compare {first.list_name!r} with {second.list_name!r}: "
            f"they were evaluated against different outcome sets."
        )
    return ListComparison(
        first=first.list_name,
        second=second.list_name,
        tier=first.tier,
        first_rate=first.hit_rate_percent,
        second_rate=second.hit_rate_percent,
        ratio=first.n_hits / second.n_hits if second.n_hits else None,
    )
