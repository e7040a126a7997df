from __future__ import annotations

import datetime

import pytest

from tests.factories import SNAPSHOT, key
from vipar.sansio import engine, rules, stats
from vipar.sansio.types import Category, Tier


@pytest.fixture(scope="module")
def small_engine():
    return engine.ViparEngine(
        scoring_info=engine.ScoringInfo(active_n=30, non_active_n=40),
        validation_info=engine.ValidationInfo(ridge=1.0),
    )


@pytest.fixture(scope="module")
def scored(small_engine, small_corpus):
    return small_engine.score(small_corpus.all_events(), small_corpus.cirv)


def test_defaults_follow_the_ruleset():
    vipar = engine.ViparEngine()
    assert vipar.window_info.recency_days == 365
    assert vipar.measure_info.pr_threshold == 1.0
    assert vipar.study_window == (datetime.date(2010, 1, 1), datetime.date(2015, 12, 31))


def test_score_micro(micro_events, micro_cirv):
    result = engine.ViparEngine().score(micro_events, micro_cirv)
    names = [p.key.full_name for p in result.store.persons]
    assert sorted(names) == list("ABCDEFG")
    assert all(e.date <= SNAPSHOT for e in result.store.events)
    assert len(result.scores) == len(names)
    d = result.store.by_key[key("D")]
    assert dict(result.scores[d].fired_rules)["cirv_member"] == 1
    assert sorted(result.ranked) == list(range(len(names)))


def test_score_ranks_every_person(scored):
    persons = scored.store.persons
    assert len(scored.scores) == len(persons)
    assert all(s.person_id == i for i, s in enumerate(scored.scores))
    order = [(-scored.scores[pid].total, pid) for pid in scored.ranked]
    assert order == sorted(order)
    assert set(scored.membership) == {p.person_id for p in persons}


def test_tiers(small_engine, scored):
    tiers = scored.tier_of(30, 40)
    assert list(tiers.values()).count(Tier.ACTIVE) == 30
    assert list(tiers.values()).count(Tier.NON_ACTIVE) == 40
    ranked = small_engine.ranked_list(scored)
    assert len(ranked) == 70
    assert ranked[0] == scored.store.persons[scored.ranked[0]].key


def test_earlier_snapshot_sees_fewer_events(small_engine, small_corpus):
    events = small_corpus.all_events()
    earlier = small_engine.score(events, snapshot=datetime.date(2012, 12, 31))
    later = small_engine.score(events)
    assert len(earlier.store.events) < len(later.store.events)
    assert len(earlier.store.persons) <= len(later.store.persons)


def test_score_is_deterministic(small_engine, small_corpus, scored):
    again = small_engine.score(reversed(small_corpus.all_events()), small_corpus.cirv)
    assert [s.total for s in again.scores] == [s.total for s in scored.scores]
    assert again.ranked == scored.ranked


@pytest.fixture(scope="module")
def evaluated(small_engine, small_corpus):
    return small_engine.evaluate(small_corpus.all_events(), small_corpus.cirv)


def test_evaluate_reports(evaluated):
    names = {r.list_name for r in evaluated.reports}
    assert names == {
        f"{name}:{outcome}"
        for name in ("vipar", "cirv", "frozen")
        for outcome in ("victims", "suspects")
    }
    assert len(evaluated.reports) == 18
    assert len(evaluated.comparisons) == 12
    for report in evaluated.reports:
        if report.list_name.startswith("vipar") and report.tier is Tier.COMBINED:
            assert report.n_list == 70
        assert 0.0 <= report.hit_rate_percent <= 100.0
    assert evaluated.holdout.n_shootings > 0


def test_evaluate_skips_frozen_list_near_study_start(small_corpus):
    early = engine.ViparEngine(
        window_info=engine.WindowInfo(cutoff=datetime.date(2011, 6, 30)),
        scoring_info=engine.ScoringInfo(active_n=30, non_active_n=40),
    )
    result = early.evaluate(small_corpus.all_events(), small_corpus.cirv)
    assert not any(r.list_name.startswith("frozen") for r in result.reports)
    assert len(result.comparisons) == 6


def test_evaluate_training_excludes_holdout(evaluated):
    cutoff = datetime.date(2014, 12, 31)
    assert all(e.date <= cutoff for e in evaluated.scoring.store.events)


def test_validate(small_engine, small_corpus):
    result = small_engine.validate(small_corpus.all_events(), small_corpus.cirv)
    assert set(result.fits) == set(Category)
    assert result.n_victims > 0
    for category, fit in result.fits.items():
        assert fit.converged
        assert fit.names[0] == stats.INTERCEPT
        assert len(fit.coefficients) == len(fit.names)
        assert len(result.summaries[category]) == len(fit.names) - 1
    assert sum(b.count for b in result.victim_age_bands) <= result.n_victims
    assert [b.label for b in result.victim_age_bands] == [
        b.label for b in rules.age_band_table([])
    ]


def test_tiers_match_the_roster(small_corpus):
    roster = small_corpus.cirv
    n_active = sum(e.active for e in roster)
    sizes = (n_active, len(roster) - n_active)
    assert sizes != (30, 40)
    vipar = engine.ViparEngine()
    assert vipar.tier_sizes(roster) == sizes
    assert vipar.tier_sizes() == (1379, 1836)
    result = vipar.evaluate(small_corpus.all_events(), roster)
    reports = {(r.list_name, r.tier): r for r in result.reports}
    for name in ("vipar", "cirv", "frozen"):
        active = reports[(f"{name}:victims", Tier.ACTIVE)]
        non_active = reports[(f"{name}:victims", Tier.NON_ACTIVE)]
        assert (active.n_list, non_active.n_list) == sizes
    cirv = reports[("cirv:victims", Tier.ACTIVE)]
    active_keys = {e.key for e in roster if e.active}
    victims = {k for k in result.holdout.victims if k.matchable}
    assert cirv.n_hits == len(active_keys & victims)


def test_configured_tier_sizes_win(small_engine, small_corpus):
    assert small_engine.tier_sizes(small_corpus.cirv) == (30, 40)
    partial = engine.ViparEngine(scoring_info=engine.ScoringInfo(active_n=5))
    roster = small_corpus.cirv
    assert partial.tier_sizes(roster) == (5, sum(not e.active for e in roster))
