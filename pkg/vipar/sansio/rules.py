"""The rule-based scoring engine."""
from __future__ import annotations

import decimal
import enum
import importlib.resources as importlib_resources
import logging
import operator
from typing import Any, Callable, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import attr
import yaml

from vipar.sansio import constants
from vipar.sansio.events import Person
from vipar.sansio.exceptions import RuleError
from vipar.sansio.history import PersonHistory
from vipar.sansio.measures import GroupMeasures, PersonMeasures
from vipar.sansio.types import Category, PersonIdT, RuleInputsT, RuleInputValueT

logger = logging.getLogger(__name__)

__all__ = (
    "AgeBand",
    "Predicate",
    "Rule",
    "RuleSet",
    "ViparScore",
    "WeightFormula",
    "age_band_table",
    "age_weight",
    "default_ruleset",
    "rank",
    "rule_inputs",
    "score_person",
    "split_tiers",
)

_QUANTUM = decimal.Decimal(constants.SCORE_QUANTUM)
ZERO = decimal.Decimal("0").quantize(_QUANTUM)


class WeightFormula(str, enum.Enum):
    AGE = "age_formula"
    PAGERANK = "pagerank_own_value"
    VIOLENT_CRIME_BUCKETS = "violent_crime_buckets"
    VIOLENT_VICTIMIZATION_BUCKETS = "violent_victimization_buckets"

    @property
    def bucketed(self) -> bool:
        return self in _BUCKETED


_BUCKETED = frozenset(
    (WeightFormula.VIOLENT_CRIME_BUCKETS, WeightFormula.VIOLENT_VICTIMIZATION_BUCKETS)
)
# 2-4 -> 1, 5-9 -> 2, 10+ -> 3; only the highest bucket reached applies.
DEFAULT_BUCKETS: Tuple[Tuple[int, float], ...] = ((2, 1.0), (5, 2.0), (10, 3.0))


def age_weight(age: float) -> float:
    """``7 - age / 10``, clamped to ``[0, 7]``.

    Raises:
        RuleError: ``age`` is negative.
    """
    if age < 0:
        raise RuleError(f"Age must be non-negative, got {age!r}.")
    raw = constants.AGE_CONSTANT - age / constants.AGE_DIVISOR
    return round(min(float(constants.AGE_CONSTANT), max(0.0, raw)), 10)


def to_decimal(value: float | int) -> decimal.Decimal:
    return decimal.Decimal(repr(float(value))).quantize(_QUANTUM)


_OPS: Dict[str, Callable[[Any, Any], bool]] = {
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "<": operator.lt,
    "<=": operator.le,
}


@attr.frozen(kw_only=True)
class Predicate:
    """A comparison of one rule input against a constant."""

    op: str = attr.field(validator=attr.validators.in_(_OPS))
    value: float

    def __call__(self, observed: RuleInputValueT) -> bool:
        return observed is not None and _OPS[self.op](observed, self.value)


def _weight(value: Union[str, float, int, WeightFormula]) -> Union[float, WeightFormula]:
    if isinstance(value, str):
        try:
            return WeightFormula(value)
        except ValueError:
            raise RuleError(f"Unknown weight formula {value!r}.") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RuleError(f"A weight must be a number or a formula tag, got {value!r}.")
    if value < 0:
        raise RuleError(f"Fixed weights must be non-negative, got {value!r}.")
    return float(value)


def _buckets(value: Iterable[Sequence[float]]) -> Tuple[Tuple[int, float], ...]:
    out = tuple(sorted((int(lo), float(w)) for lo, w in value))
    if any(w < 0 for _, w in out):
        raise RuleError("Bucket weights must be non-negative.")
    return out


@attr.frozen(kw_only=True)
class Rule:
    """One weighted rule: when its predicate holds, it adds its weight.

    Without an explicit predicate a rule fires when its input is truthy. Formula
    weights compute their contribution from the input instead of adding a constant.
    """

    rule_id: str
    category: Category = attr.field(converter=Category)
    input: str
    weight: Union[float, WeightFormula] = attr.field(converter=_weight)
    when: Predicate | None = None
    buckets: Tuple[Tuple[int, float], ...] = attr.field(
        default=DEFAULT_BUCKETS, converter=_buckets
    )

    def __attrs_post_init__(self):
        if self.input not in RULE_INPUTS:
            raise RuleError(f"Rule {self.rule_id!r} reads unknown input {self.input!r}.")

    def contribution(self, inputs: RuleInputsT) -> decimal.Decimal:
        observed = inputs.get(self.input)
        if observed is None:
            return ZERO
        if self.when is not None and not self.when(observed):
            return ZERO
        weight = self.weight
        if weight is WeightFormula.AGE:
            return to_decimal(age_weight(observed))
        if weight is WeightFormula.PAGERANK:
            return to_decimal(observed)
        if isinstance(weight, WeightFormula):
            reached = [w for lo, w in self.buckets if observed >= lo]
            return to_decimal(reached[-1]) if reached else ZERO
        if self.when is None and not observed:
            return ZERO
        return to_decimal(weight)

    def scaled(self, factor: float) -> Rule:
        if isinstance(self.weight, WeightFormula):
            if not self.weight.bucketed:
                return self
            return attr.evolve(
                self, buckets=tuple((lo, w * factor) for lo, w in self.buckets)
            )
        return attr.evolve(self, weight=self.weight * factor)


def _unique_ids(instance, attribute, value: Tuple[Rule, ...]):
    seen = set()
    for rule in value:
        if rule.rule_id in seen:
            raise RuleError(f"Duplicate rule id {rule.rule_id!r}.")
        seen.add(rule.rule_id)


@attr.frozen(kw_only=True)
class RuleSet:
    """An immutable, ordered collection of rules plus the knobs they depend on."""

    rules: Tuple[Rule, ...] = attr.field(converter=tuple, validator=_unique_ids)
    recency_days: int = constants.RECENCY_DAYS
    pr_threshold: float = constants.PR_THRESHOLD

    def __len__(self) -> int:
        return len(self.rules)

    def by_category(self, category: Category) -> List[Rule]:
        return [r for r in self.rules if r.category is category]

    def scaled(self, factor: float) -> RuleSet:
        """Multiply every fixed and bucket weight by ``factor``; formulas stay."""
        return attr.evolve(self, rules=tuple(r.scaled(factor) for r in self.rules))

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> RuleSet:
        """Build a rule set from its structured-text form.

        The mapping has optional ``recency_days`` and ``pr_threshold`` keys and a
        ``rules`` mapping from category to a list of rule entries, each with ``id``,
        ``input``, ``weight`` and optionally ``when: {op, value}`` and ``buckets``.
        """
        if not isinstance(data, Mapping) or "rules" not in data:
            raise RuleError("A rule set needs a 'rules' section.")
        rules = []
        for category, entries in data["rules"].items():
            for entry in entries or ():
                try:
                    when = entry.get("when")
                    rules.append(
                        Rule(
                            rule_id=entry["id"],
                            category=category,
                            input=entry["input"],
                            weight=entry["weight"],
                            when=Predicate(**when) if when else None,
                            buckets=entry.get("buckets", DEFAULT_BUCKETS),
                        )
                    )
                except (KeyError, TypeError, ValueError) as e:
                    if isinstance(e, RuleError):
                        raise
                    raise RuleError(f"Malformed rule entry {entry!r}: {e}") from e
        return cls(
            rules=rules,
            recency_days=int(data.get("recency_days", constants.RECENCY_DAYS)),
            pr_threshold=float(data.get("pr_threshold", constants.PR_THRESHOLD)),
        )

    @classmethod
    def from_yaml(cls, text: str) -> RuleSet:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise RuleError(f"Rule set is not valid YAML: {e}") from e
        return cls.from_mapping(data)

    def to_mapping(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "recency_days": self.recency_days,
            "pr_threshold": self.pr_threshold,
            "rules": {c.value: [] for c in Category},
        }
        for rule in self.rules:
            entry: Dict[str, Any] = {
                "id": rule.rule_id,
                "input": rule.input,
                "weight": (
                    rule.weight.value
                    if isinstance(rule.weight, WeightFormula)
                    else rule.weight
                ),
            }
            if rule.when is not None:
                entry["when"] = {"op": rule.when.op, "value": rule.when.value}
            if isinstance(rule.weight, WeightFormula) and rule.weight.bucketed:
                entry["buckets"] = [list(b) for b in rule.buckets]
            out["rules"][rule.category.value].append(entry)
        return out


@attr.frozen(kw_only=True)
class ViparScore:
    """A person's additive score, split by rule category.

    ``fired_rules`` lists every rule with a non-zero contribution, in rule-set order.
    """

    person_id: PersonIdT
    personal: decimal.Decimal = ZERO
    positional: decimal.Decimal = ZERO
    structural: decimal.Decimal = ZERO
    fired_rules: Tuple[Tuple[str, decimal.Decimal], ...] = ()

    @property
    def total(self) -> decimal.Decimal:
        return self.personal + self.positional + self.structural

    def component(self, category: Category) -> decimal.Decimal:
        return getattr(self, category.value)


# Every input a rule may read, with the category it describes.
RULE_INPUTS: Dict[str, Category] = {
    "age": Category.PERSONAL,
    "cirv_member": Category.PERSONAL,
    "cirv_active": Category.PERSONAL,
    "violent_crimes": Category.PERSONAL,
    "recent_violent_crimes": Category.PERSONAL,
    "violent_victimizations": Category.PERSONAL,
    "recent_violent_victimizations": Category.PERSONAL,
    "firearm_incidents": Category.PERSONAL,
    "recent_firearm_incidents": Category.PERSONAL,
    "misdemeanors_committed": Category.PERSONAL,
    "recent_misdemeanors_committed": Category.PERSONAL,
    "misdemeanor_victimizations": Category.PERSONAL,
    "shootings": Category.PERSONAL,
    "degree_centrality": Category.POSITIONAL,
    "event_count": Category.POSITIONAL,
    "simplified_pagerank": Category.POSITIONAL,
    "reference_pagerank": Category.POSITIONAL,
    "high_pr_friend_d1": Category.POSITIONAL,
    "cirv_friend_d1": Category.POSITIONAL,
    "cirv_friend_d2": Category.POSITIONAL,
    "cirv_friend_d3": Category.POSITIONAL,
    "shooting_friend_d1": Category.POSITIONAL,
    "shooting_friend_d2": Category.POSITIONAL,
    "group_member_count": Category.STRUCTURAL,
    "group_violent_crime_count": Category.STRUCTURAL,
    "group_violent_victimization_count": Category.STRUCTURAL,
    "group_recent_violent_victimization_count": Category.STRUCTURAL,
    "group_shooting_count": Category.STRUCTURAL,
    "group_recent_shooting_count": Category.STRUCTURAL,
}


def rule_inputs(
    person: Person,
    history: PersonHistory,
    measures: PersonMeasures,
    group_measures: GroupMeasures,
) -> Dict[str, RuleInputValueT]:
    """Flatten everything known about a person into the inputs rules read."""
    inputs: Dict[str, RuleInputValueT] = {
        "age": person.age_at_snapshot,
        "cirv_member": person.on_cirv_list,
        "cirv_active": person.cirv_status.value == "active",
    }
    inputs.update(attr.asdict(history))
    inputs.update(attr.asdict(measures))
    inputs.update(
        {f"group_{k}": v for k, v in attr.asdict(group_measures).items()}
    )
    return inputs


def score_person(
    person: Person,
    measures: PersonMeasures,
    group_measures: GroupMeasures,
    ruleset: RuleSet,
    *,
    history: PersonHistory,
) -> ViparScore:
    """Evaluate every rule for one person.

    Args:
        person: The person being scored.
        measures: The person's network measures.
        group_measures: Aggregates of the person's group; every member of a group
            receives the same structural contribution.
        ruleset: The rules to apply.
        history: The person's personal criminal-history counts.

    Returns:
        The component-split score with its audit trail of fired rules.
    """
    inputs = rule_inputs(person, history, measures, group_measures)
    components = {c: ZERO for c in Category}
    fired = []
    for rule in ruleset.rules:
        contribution = rule.contribution(inputs)
        if not contribution:
            continue
        components[rule.category] += contribution
        fired.append((rule.rule_id, contribution))
        logger.debug(
            "Person %d: rule %s adds %s.", person.person_id, rule.rule_id, contribution
        )
    return ViparScore(
        person_id=person.person_id,
        personal=components[Category.PERSONAL],
        positional=components[Category.POSITIONAL],
        structural=components[Category.STRUCTURAL],
        fired_rules=tuple(fired),
    )


def rank(scores: Iterable[ViparScore], n: int) -> List[PersonIdT]:
    """The ``n`` highest-scoring person ids; ties go to the lower person id.

    Raises:
        RuleError: ``n`` is not positive or exceeds the number of scores.
    """
    scores = list(scores)
    if n <= 0:
        raise RuleError(f"List size must be positive, got {n!r}.")
    if n > len(scores):
        raise RuleError(f"Cannot rank {n:,} persons out of {len(scores):,} scored.")
    ordered = sorted(scores, key=lambda s: (-s.total, s.person_id))
    return [s.person_id for s in ordered[:n]]


def split_tiers(
    ranked: Sequence[PersonIdT],
    active_n: int = constants.ACTIVE_TIER_SIZE,
    non_active_n: int = constants.NON_ACTIVE_TIER_SIZE,
) -> Tuple[List[PersonIdT], List[PersonIdT]]:
    """Cut a ranked list into an active tier and the non-active tier after it."""
    return list(ranked[:active_n]), list(ranked[active_n : active_n + non_active_n])


@attr.frozen(kw_only=True)
class AgeBand:
    label: str
    count: int
    min_weight: float | None
    max_weight: float | None


def age_band_table(ages: Iterable[float | None]) -> List[AgeBand]:
    """Count ages per band with the range of age weights seen in each band.

    Ages are banded by completed years; ages below the first band are left out.
    """
    weights: Dict[str, list] = {label: [] for label, _, _ in constants.AGE_BANDS}
    for age in ages:
        if age is None:
            continue
        years = int(age)
        for label, lo, hi in constants.AGE_BANDS:
            if years >= lo and (hi is None or years <= hi):
                weights[label].append(age_weight(age))
                break
    return [
        AgeBand(
            label=label,
            count=len(weights[label]),
            min_weight=min(weights[label], default=None),
            max_weight=max(weights[label], default=None),
        )
        for label, _, _ in constants.AGE_BANDS
    ]


def default_ruleset() -> RuleSet:
    """The rule set shipped with the package."""
    return RuleSet.from_yaml(
        importlib_resources.read_text("vipar.rulesets", constants.DEFAULT_RULESET)
    )
