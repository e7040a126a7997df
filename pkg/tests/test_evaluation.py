from __future__ import annotations

import logging

import pytest

from tests.factories import SNAPSHOT, key
from vipar.sansio import evaluation
from vipar.sansio.events import CirvEntry
from vipar.sansio.exceptions import EvaluationError
from vipar.sansio.types import EventType, Tier


def people(prefix: str, n: int):
    return [key(f"{prefix} {i:05d}") for i in range(n)]


@pytest.fixture
def suspect_lists():
    """149 outcomes, 34 of them in the active tier and 14 in the non-active tier."""
    outcomes = people("OUTCOME", 149)
    ranked = outcomes[:34] + people("ACTIVE", 1379 - 34)
    ranked += outcomes[34:48] + people("NONACTIVE", 1836 - 14)
    return ranked, outcomes


def test_published_tier_rates(suspect_lists):
    ranked, outcomes = suspect_lists
    active, non_active, combined = evaluation.evaluate_tiers(
        ranked, outcomes, list_name="vipar"
    )
    assert (active.tier, non_active.tier, combined.tier) == (
        Tier.ACTIVE,
        Tier.NON_ACTIVE,
        Tier.COMBINED,
    )
    assert (active.n_list, non_active.n_list, combined.n_list) == (1379, 1836, 3215)
    assert (active.n_hits, non_active.n_hits, combined.n_hits) == (34, 14, 48)
    assert active.hit_rate_percent == 22.8
    assert non_active.hit_rate_percent == 9.4
    assert combined.hit_rate_percent == 32.2


def test_victim_rate():
    outcomes = people("VICTIM", 477)
    report = evaluation.match_and_rate(outcomes[:123], outcomes, list_name="vipar")
    assert report.hit_rate_percent == 25.8
    assert report.as_dict()["tier"] == "combined"


def test_outcomes_count_once_and_need_a_dob():
    outcomes = [key("A"), key("A"), key("B"), key("C", None)]
    report = evaluation.match_and_rate([key("A"), key("C", None)], outcomes, list_name="x")
    assert (report.n_outcomes, report.n_hits, report.n_excluded) == (2, 1, 1)
    assert report.hit_rate_percent == 50.0


def test_empty_outcomes_rate_zero():
    report = evaluation.match_and_rate([key("A")], [], list_name="x")
    assert report.hit_rate_percent == 0.0


def test_compare_lists():
    outcomes = people("VICTIM", 477)
    vipar = evaluation.match_and_rate(outcomes[:123], outcomes, list_name="vipar")
    cirv = evaluation.match_and_rate(
        outcomes[123:185] + people("OTHER", 100), outcomes, list_name="cirv"
    )
    assert cirv.hit_rate_percent == 13.0
    comparison = evaluation.compare_lists(vipar, cirv)
    assert comparison.ratio == pytest.approx(1.98, abs=0.01)
    assert (comparison.first, comparison.second) == ("vipar", "cirv")
    assert comparison.as_dict()["tier"] == "combined"


def test_compare_lists_disjoint_recount():
    outcomes = people("VICTIM", 300)
    first = outcomes[:90] + people("X", 10)
    second = outcomes[200:230]
    a = evaluation.match_and_rate(first, outcomes, list_name="a")
    b = evaluation.match_and_rate(second, outcomes, list_name="b")
    hits_a = len(set(first) & set(outcomes))
    hits_b = len(set(second) & set(outcomes))
    assert evaluation.compare_lists(a, b).ratio == hits_a / hits_b


def test_compare_lists_without_baseline_hits():
    outcomes = people("VICTIM", 10)
    a = evaluation.match_and_rate(outcomes[:3], outcomes, list_name="a")
    b = evaluation.match_and_rate(people("X", 3), outcomes, list_name="b")
    assert evaluation.compare_lists(a, b).ratio is None


def test_compare_lists_needs_the_same_outcomes():
    a = evaluation.match_and_rate([key("A")], [key("A")], list_name="a")
    b = evaluation.match_and_rate([key("A")], [key("B")], list_name="b")
    with pytest.raises(EvaluationError):
        evaluation.compare_lists(a, b)


def test_outcome_digest_ignores_order_and_repeats():
    assert evaluation.outcome_digest([key("A"), key("B")]) == evaluation.outcome_digest(
        [key("B"), key("A"), key("A"), key("C", None)]
    )


def test_temporal_split(micro_events):
    holdout = evaluation.temporal_split(micro_events, SNAPSHOT)
    assert {e.event_id for e in holdout.training} == {"E1", "E2", "E3", "E4", "S1"}
    assert holdout.victims == (key("C"),)
    assert holdout.suspects == (key("E"),)
    assert holdout.n_shootings == 1


def test_temporal_split_matches_date_filter(small_corpus):
    events = small_corpus.all_events()
    cutoff = small_corpus.config.cutoff
    holdout = evaluation.temporal_split(events, cutoff)
    assert holdout.training == tuple(e for e in events if e.date <= cutoff)
    later = [
        e for e in events if e.date > cutoff and e.event_type is EventType.SHOOTING
    ]
    assert holdout.n_shootings == len(later) > 0
    assert len(holdout.victims) == len(later)


def test_temporal_split_warns_on_empty_holdout(micro_events, caplog):
    with caplog.at_level(logging.WARNING, logger="vipar.sansio.evaluation"):
        holdout = evaluation.temporal_split(micro_events[:5], SNAPSHOT)
    assert holdout.n_shootings == 0
    assert "hold-out is empty" in caplog.text


def test_cirv_baseline_tiers_by_status():
    roster = [
        CirvEntry(key=key("ZED"), active=True),
        CirvEntry(key=key("ABE"), active=False),
        CirvEntry(key=key("MAX"), active=True),
        CirvEntry(key=key("ABE"), active=True),
        CirvEntry(key=key("BOB"), active=False),
    ]
    active, non_active = evaluation.cirv_baseline(roster)
    assert active == [key("ABE"), key("MAX"), key("ZED")]
    assert non_active == [key("BOB")]


def test_roster_reports_follow_member_status():
    roster = [CirvEntry(key=key(f"M {i:03d}"), active=i < 4) for i in range(10)]
    outcomes = [key("M 000"), key("M 001"), key("M 007"), key("OTHER")]
    active, non_active, combined = evaluation.evaluate_roster(
        roster, outcomes, list_name="cirv:victims"
    )
    assert (active.n_list, non_active.n_list, combined.n_list) == (4, 6, 10)
    assert (active.n_hits, non_active.n_hits, combined.n_hits) == (2, 1, 3)
    assert active.hit_rate_percent == 50.0
