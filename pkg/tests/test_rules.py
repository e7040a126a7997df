from __future__ import annotations

import decimal
import random

import attr
import pytest

from tests.factories import key
from vipar.sansio import rules
from vipar.sansio.events import Person
from vipar.sansio.exceptions import RuleError
from vipar.sansio.history import PersonHistory
from vipar.sansio.measures import GroupMeasures, PersonMeasures
from vipar.sansio.types import Category, CirvStatus

D = decimal.Decimal


@pytest.fixture(scope="module")
def ruleset():
    return rules.default_ruleset()


def person(age=18.0, cirv=CirvStatus.NONE, pid=0):
    return Person(person_id=pid, key=key("A"), age_at_snapshot=age, cirv_status=cirv)


def high_risk():
    """An 18-year-old CIRV member with a recent firearm incident, PageRank 0.8, a
    high-PageRank friend and a group with 12 violent crimes."""
    return dict(
        person=person(18.0, CirvStatus.ACTIVE),
        measures=PersonMeasures(
            degree_centrality=4,
            event_count=6,
            simplified_pagerank=0.8,
            high_pr_friend_d1=True,
        ),
        group_measures=GroupMeasures(member_count=5, violent_crime_count=12),
        history=PersonHistory(firearm_incidents=1, recent_firearm_incidents=1),
    )


def score(ruleset, *, person, measures, group_measures, history):
    return rules.score_person(person, measures, group_measures, ruleset, history=history)


@pytest.mark.parametrize(
    argnames="age,expected",
    argvalues=[(18.0, 5.2), (70.0, 0.0), (80.9, 0.0), (0.0, 7.0), (35.5, 3.45)],
)
def test_age_weight(age, expected):
    assert rules.age_weight(age) == pytest.approx(expected)


def test_age_weight_rejects_negative_age():
    with pytest.raises(RuleError):
        rules.age_weight(-1)


def test_default_ruleset(ruleset):
    assert len(ruleset) == 21
    assert [len(ruleset.by_category(c)) for c in Category] == [9, 4, 8]
    assert ruleset.recency_days == 365
    assert ruleset.pr_threshold == 1.0


def test_ruleset_mapping_round_trip(ruleset):
    assert rules.RuleSet.from_mapping(ruleset.to_mapping()) == ruleset


@pytest.mark.parametrize(
    argnames="entry",
    argvalues=[
        {"id": "x", "input": "shoe_size", "weight": 1},
        {"id": "x", "input": "age", "weight": "vibes"},
        {"id": "x", "input": "age", "weight": -1},
        {"id": "x", "input": "age", "weight": 1, "when": {"op": "~", "value": 1}},
        {"input": "age", "weight": 1},
    ],
)
def test_ruleset_rejects_bad_rules(entry):
    with pytest.raises(RuleError):
        rules.RuleSet.from_mapping({"rules": {"personal": [entry]}})


def test_ruleset_rejects_duplicate_ids():
    entry = {"id": "x", "input": "age", "weight": 1}
    with pytest.raises(RuleError):
        rules.RuleSet.from_mapping({"rules": {"personal": [entry, entry]}})


def test_ruleset_from_yaml_errors():
    with pytest.raises(RuleError):
        rules.RuleSet.from_yaml("rules: [unclosed")
    with pytest.raises(RuleError):
        rules.RuleSet.from_yaml("recency_days: 30\n")


def test_worked_example(ruleset):
    result = score(ruleset, **high_risk())
    assert result.total == D("13.5")
    assert result.personal == D("8.7")
    assert result.positional == D("1.8")
    assert result.structural == D("3")
    assert dict(result.fired_rules) == {
        "age": D("5.2"),
        "cirv_member": D("1"),
        "any_firearm_crime": D("1"),
        "recent_firearm_crime": D("1.5"),
        "pagerank": D("0.8"),
        "high_pr_friend_d1": D("1"),
        "group_violent_crimes": D("3"),
    }


def test_elderly_loner(ruleset):
    result = score(
        ruleset,
        person=person(70.0),
        measures=PersonMeasures(
            degree_centrality=0, event_count=1, simplified_pagerank=0.1
        ),
        group_measures=GroupMeasures(member_count=1),
        history=PersonHistory(),
    )
    assert result.total == D("0.1")
    assert [rule_id for rule_id, _ in result.fired_rules] == ["pagerank"]


def test_missing_age_contributes_nothing(ruleset):
    inputs = high_risk()
    inputs["person"] = person(None, CirvStatus.ACTIVE)
    assert score(ruleset, **inputs).total == D("8.3")


def test_scaling_fixed_weights(ruleset):
    inputs = high_risk()
    base = score(ruleset, **inputs)
    doubled = score(ruleset.scaled(2), **inputs)
    formulas = D("5.2") + D("0.8")
    assert doubled.total - formulas == 2 * (base.total - formulas)


@pytest.mark.parametrize(
    argnames="count,expected",
    argvalues=[
        (0, "0"),
        (1, "0"),
        (2, "1"),
        (4, "1"),
        (5, "2"),
        (9, "2"),
        (10, "3"),
        (40, "3"),
    ],
)
def test_violent_crime_buckets(ruleset, count, expected):
    (rule,) = [r for r in ruleset.rules if r.rule_id == "group_violent_crimes"]
    assert rule.contribution({"group_violent_crime_count": count}) == D(expected)


@pytest.mark.parametrize(
    argnames="misdemeanors,fires",
    argvalues=[(3, False), (4, True)],
)
def test_misdemeanor_threshold_is_strict(ruleset, misdemeanors, fires):
    (rule,) = [r for r in ruleset.rules if r.rule_id == "misdemeanors_committed_gt3"]
    assert bool(rule.contribution({"misdemeanors_committed": misdemeanors})) is fires


def test_overlapping_recent_shooting_rules_both_fire(ruleset):
    inputs = high_risk()
    inputs["group_measures"] = GroupMeasures(
        member_count=5, shooting_count=6, recent_shooting_count=6
    )
    fired = dict(score(ruleset, **inputs).fired_rules)
    assert fired["group_recent_shootings_ge1"] == D("2")
    assert fired["group_recent_shootings_gt5"] == D("1")
    assert fired["group_shootings_ge3"] == D("1")


def test_component_audit(ruleset):
    rng = random.Random(1)
    by_id = {r.rule_id: r.category for r in ruleset.rules}
    for _ in range(200):
        result = score(
            ruleset,
            person=person(rng.uniform(13, 80), rng.choice(list(CirvStatus))),
            measures=PersonMeasures(
                degree_centrality=rng.randint(0, 20),
                event_count=rng.randint(1, 20),
                simplified_pagerank=round(rng.uniform(0.1, 5), 2),
                high_pr_friend_d1=rng.random() < 0.5,
                cirv_friend_d1=rng.random() < 0.5,
                shooting_friend_d1=rng.random() < 0.5,
            ),
            group_measures=GroupMeasures(
                member_count=rng.randint(1, 40),
                violent_crime_count=rng.randint(0, 15),
                violent_victimization_count=rng.randint(0, 15),
                recent_violent_victimization_count=rng.randint(0, 10),
                shooting_count=rng.randint(0, 12),
                recent_shooting_count=rng.randint(0, 6),
            ),
            history=PersonHistory(
                **{f.name: rng.randint(0, 4) for f in attr.fields(PersonHistory)}
            ),
        )
        for category in Category:
            assert result.component(category) == sum(
                (c for r, c in result.fired_rules if by_id[r] is category), D(0)
            )
        assert result.total == result.personal + result.positional + result.structural
        assert result.total >= 0


def test_boolean_inputs_are_monotone(ruleset):
    inputs = high_risk()
    inputs["measures"] = attr.evolve(inputs["measures"], high_pr_friend_d1=False)
    base = score(ruleset, **inputs).total
    for flag in ("high_pr_friend_d1", "cirv_friend_d1", "shooting_friend_d1"):
        raised = dict(inputs, measures=attr.evolve(inputs["measures"], **{flag: True}))
        assert score(ruleset, **raised).total >= base


def test_younger_scores_at_least_as_high(ruleset):
    inputs = high_risk()
    older = score(ruleset, **dict(inputs, person=person(40.0))).total
    younger = score(ruleset, **dict(inputs, person=person(22.5))).total
    assert younger >= older


def make_scores(totals):
    return [
        rules.ViparScore(person_id=pid, personal=D(str(total)))
        for pid, total in enumerate(totals)
    ]


def test_rank_ties_go_to_lower_id():
    assert rules.rank(make_scores([5, 7, 5]), 2) == [1, 0]
    assert rules.rank(make_scores([5, 7, 5]), 3) == [1, 0, 2]


def test_rank_ignores_constant_shift():
    rng = random.Random(2)
    totals = [rng.randint(0, 30) for _ in range(100)]
    shifted = [t + 3 for t in totals]
    assert rules.rank(make_scores(totals), 50) == rules.rank(make_scores(shifted), 50)


def test_rank_errors():
    with pytest.raises(RuleError):
        rules.rank(make_scores([1, 2]), 0)
    with pytest.raises(RuleError):
        rules.rank(make_scores([1, 2]), 3)


def test_split_tiers():
    ranked = list(range(4000))
    active, non_active = rules.split_tiers(ranked[:3215])
    assert (len(active), len(non_active)) == (1379, 1836)
    assert non_active[0] == 1379


def test_age_band_table():
    ages = [13.5, 17.9, 18.0, 24.9, 70.2, None, 12.0]
    bands = {b.label: b for b in rules.age_band_table(ages)}
    assert bands["13-17"].count == 2
    assert bands["13-17"].min_weight == pytest.approx(5.21)
    assert bands["13-17"].max_weight == pytest.approx(5.65)
    assert bands["18-24"].count == 2
    assert bands["61+"].max_weight == 0.0
    assert bands["25-30"].count == 0 and bands["25-30"].min_weight is None
