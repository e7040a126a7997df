from __future__ import annotations

import datetime
import logging
from typing import Dict, Iterable, List, Sequence, Tuple

import attr

from vipar.sansio import constants, evaluation, history, measures, network, rules, stats
from vipar.sansio.events import CirvEntry, EventRecord, PersonKey
from vipar.sansio.exceptions import ConfigError
from vipar.sansio.identity import EventStore, dedupe_cirv
from vipar.sansio.types import Category, CrimeFlag, GroupIdT, PersonIdT, Tier

logger = logging.getLogger(__name__)

__all__ = (
    "EvaluationResult",
    "MeasureInfo",
    "ScoringInfo",
    "ScoringResult",
    "ValidationInfo",
    "ValidationResult",
    "ViparEngine",
    "WindowInfo",
)


class ViparEngine:
    """The IO-free VIPAR pipeline: network construction, measures, scoring and checks.

    The engine holds configuration only. Every stage is a pure function of the events
    and CIRV roster handed to it, so one engine can score many corpora.
    """

    __slots__ = ("window_info", "measure_info", "scoring_info", "validation_info")

    def __init__(
        self,
        *,
        window_info: WindowInfo = None,
        measure_info: MeasureInfo = None,
        scoring_info: ScoringInfo = None,
        validation_info: ValidationInfo = None,
    ):
        self.window_info = window_info or WindowInfo()
        self.scoring_info = scoring_info or ScoringInfo()
        if self.scoring_info.ruleset is None:
            self.scoring_info.ruleset = rules.default_ruleset()
        ruleset = self.scoring_info.ruleset
        if self.window_info.recency_days is None:
            self.window_info.recency_days = ruleset.recency_days
        self.measure_info = measure_info or MeasureInfo()
        if self.measure_info.pr_threshold is None:
            self.measure_info.pr_threshold = ruleset.pr_threshold
        self.validation_info = validation_info or ValidationInfo()
        window = self.window_info
        if not window.study_start <= window.snapshot <= window.study_end:
            raise ConfigError(
                f"Snapshot {window.snapshot} lies outside the study window "
                f"{window.study_start}..{window.study_end}."
            )
        if not window.study_start < window.cutoff < window.study_end:
            raise ConfigError(
                f"Cutoff {window.cutoff} must fall strictly inside the study window "
                f"{window.study_start}..{window.study_end}."
            )
        if window.recency_days < 0:
            raise ConfigError("recency_days must be non-negative.")

    @property
    def study_window(self) -> Tuple[datetime.date, datetime.date]:
        return self.window_info.study_start, self.window_info.study_end

    def score(
        self,
        events: Iterable[EventRecord],
        cirv: Iterable[CirvEntry] = (),
        *,
        snapshot: datetime.date | None = None,
    ) -> ScoringResult:
        """Score every person seen in an event dated on or before the snapshot."""
        snapshot = snapshot or self.window_info.snapshot
        recency = self.window_info.recency_days
        training = [e for e in events if e.date <= snapshot]
        store = EventStore.build(training, snapshot=snapshot, cirv=cirv)
        graph = network.build_graph(store.events, store.persons)
        groups = network.components(graph)
        membership = network.group_index(groups)

        cirv_roster = {p.person_id for p in store.persons if p.on_cirv_list}
        shooting_roster = {
            pid
            for e in store.events
            if e.has(CrimeFlag.SHOOTING)
            for pid, _ in store.index[e.event_id]
        }
        info = self.measure_info
        person_measures = measures.compute_measures(
            graph,
            cirv_roster=cirv_roster,
            shooting_roster=shooting_roster,
            pr_threshold=info.pr_threshold,
            reference=info.reference,
            damping=info.damping,
            tol=info.tol,
            max_iter=info.max_iter,
        )
        group_measures = measures.group_aggregates(
            groups, store.events, store.index, snapshot=snapshot, recency_days=recency
        )
        histories = {
            p.person_id: history.summarize_history(
                p, store.events_by_id, snapshot=snapshot, recency_days=recency
            )
            for p in store.persons
        }
        ruleset = self.scoring_info.ruleset
        scores = [
            rules.score_person(
                p,
                person_measures[p.person_id],
                group_measures[membership[p.person_id]],
                ruleset,
                history=histories[p.person_id],
            )
            for p in store.persons
        ]
        ranked = rules.rank(scores, len(scores)) if scores else []
        logger.info("Scored %d persons at %s.", len(scores), snapshot)
        return ScoringResult(
            store=store,
            graph=graph,
            groups=groups,
            membership=membership,
            measures=person_measures,
            group_measures=group_measures,
            histories=histories,
            scores=scores,
            ranked=ranked,
        )

    def tier_sizes(self, cirv: Iterable[CirvEntry] = ()) -> Tuple[int, int]:
        """The active and non-active tier sizes for a run against ``cirv``.

        A size that is not configured matches the roster's count of active (or
        non-active) members, so the VIPAR tiers line up with the CIRV tiers. Without a
        roster the default sizes apply.
        """
        info = self.scoring_info
        roster = dedupe_cirv(cirv)
        if roster:
            active = sum(e.active for e in roster)
            defaults = (active, len(roster) - active)
        else:
            defaults = (constants.ACTIVE_TIER_SIZE, constants.NON_ACTIVE_TIER_SIZE)
        return (
            defaults[0] if info.active_n is None else info.active_n,
            defaults[1] if info.non_active_n is None else info.non_active_n,
        )

    def ranked_list(
        self, result: ScoringResult, sizes: Tuple[int, int] | None = None
    ) -> List[PersonKey]:
        """The person keys of the active and non-active tiers, best first."""
        active_n, non_active_n = sizes or self.tier_sizes()
        size = min(active_n + non_active_n, len(result.ranked))
        return [result.store.persons[pid].key for pid in result.ranked[:size]]

    def evaluate(
        self, events: Iterable[EventRecord], cirv: Iterable[CirvEntry] = ()
    ) -> EvaluationResult:
        """Score on the training window and match the lists against later shootings.

        Three lists are evaluated: the VIPAR list, the CIRV roster tiered by member
        status and a "frozen" VIPAR list computed two years before the snapshot. Both
        VIPAR lists are cut to :py:meth:`tier_sizes`.
        """
        events = list(events)
        cirv = tuple(cirv)
        window = self.window_info
        holdout = evaluation.temporal_split(events, window.cutoff)
        snapshot = min(window.snapshot, window.cutoff)
        current = self.score(holdout.training, cirv, snapshot=snapshot)
        frozen_at = _years_before(snapshot, 2)
        frozen = (
            self.score(holdout.training, cirv, snapshot=frozen_at)
            if frozen_at >= window.study_start
            else None
        )
        active_n, non_active_n = sizes = self.tier_sizes(cirv)
        lists = {"vipar": self.ranked_list(current, sizes)}
        if frozen is not None:
            lists["frozen"] = self.ranked_list(frozen, sizes)

        reports: List[evaluation.EvaluationReport] = []
        comparisons: List[evaluation.ListComparison] = []
        for outcome, keys in (("victims", holdout.victims), ("suspects", holdout.suspects)):
            by_list = {
                name: evaluation.evaluate_tiers(
                    ranked,
                    keys,
                    list_name=f"{name}:{outcome}",
                    active_n=active_n,
                    non_active_n=non_active_n,
                )
                for name, ranked in lists.items()
            }
            by_list["cirv"] = evaluation.evaluate_roster(
                cirv, keys, list_name=f"cirv:{outcome}"
            )
            for tiers in by_list.values():
                reports.extend(tiers)
            for baseline in ("cirv", "frozen"):
                if baseline in by_list:
                    comparisons.extend(
                        evaluation.compare_lists(a, b)
                        for a, b in zip(by_list["vipar"], by_list[baseline])
                    )
        return EvaluationResult(
            holdout=holdout,
            scoring=current,
            reports=reports,
            comparisons=comparisons,
        )

    def validate(
        self, events: Iterable[EventRecord], cirv: Iterable[CirvEntry] = ()
    ) -> ValidationResult:
        """Regress hold-out shooting victimization on each category's predictors."""
        window = self.window_info
        holdout = evaluation.temporal_split(list(events), window.cutoff)
        result = self.score(
            holdout.training, cirv, snapshot=min(window.snapshot, window.cutoff)
        )
        store = result.store
        victims = {
            pid
            for pid in (store.by_key.get(k) for k in holdout.victims if k.matchable)
            if pid is not None
        }
        inputs = {
            p.person_id: rules.rule_inputs(
                p,
                result.histories[p.person_id],
                result.measures[p.person_id],
                result.group_measures[result.membership[p.person_id]],
            )
            for p in store.persons
        }
        info = self.validation_info
        fits: Dict[Category, stats.LogitFit] = {}
        summaries: Dict[Category, List[stats.VariableSummary]] = {}
        flags: Dict[Category, List[stats.CorrelationFlag]] = {}
        for category in Category:
            design = stats.design_matrix(inputs, category)
            columns = design.columns()
            summaries[category] = stats.describe(columns) if design.person_ids else []
            flags[category] = stats.screen_collinearity(
                columns, warn_r=info.warn_r, flag_r=info.flag_r
            )
            fits[category] = stats.logit_fit(
                design.values,
                stats.outcome_vector(design.person_ids, victims),
                ridge=info.ridge,
                names=design.names,
            )
            logger.info(
                "Fitted the %s regression on %d persons.",
                category.value,
                len(design.person_ids),
            )
        ages = [store.persons[pid].age_at_snapshot for pid in sorted(victims)]
        return ValidationResult(
            fits=fits,
            summaries=summaries,
            collinearity=flags,
            victim_age_bands=rules.age_band_table(ages),
            n_victims=len(victims),
        )


def _years_before(date: datetime.date, years: int) -> datetime.date:
    try:
        return date.replace(year=date.year - years)
    except ValueError:
        # February 29th.
        return date.replace(year=date.year - years, day=28)


@attr.s(kw_only=True, slots=True, auto_attribs=True)
class WindowInfo:
    study_start: datetime.date = constants.STUDY_START
    study_end: datetime.date = constants.STUDY_END
    cutoff: datetime.date = constants.STUDY_CUTOFF
    snapshot: datetime.date = attr.field()
    recency_days: int | None = None
    """Falls back to the rule set's recency window."""

    @snapshot.default
    def _snapshot(self):
        return self.cutoff


@attr.s(kw_only=True, slots=True, auto_attribs=True)
class MeasureInfo:
    pr_threshold: float | None = None
    """Falls back to the rule set's threshold."""
    reference: bool = True
    damping: float = constants.PAGERANK_DAMPING
    tol: float = constants.PAGERANK_TOL
    max_iter: int = constants.PAGERANK_MAX_ITER


@attr.s(kw_only=True, slots=True, auto_attribs=True)
class ScoringInfo:
    ruleset: rules.RuleSet | None = None
    active_n: int | None = None
    """Falls back to the CIRV roster's active count, then to the default tier size."""
    non_active_n: int | None = None


@attr.s(kw_only=True, slots=True, auto_attribs=True)
class ValidationInfo:
    ridge: float = 0.0
    warn_r: float = constants.COLLINEARITY_WARN_R
    flag_r: float = constants.COLLINEARITY_FLAG_R


@attr.frozen(kw_only=True)
class ScoringResult:
    store: EventStore
    graph: network.CoOffendingGraph
    groups: Sequence[network.Group]
    membership: Dict[PersonIdT, GroupIdT]
    measures: Dict[PersonIdT, measures.PersonMeasures]
    group_measures: Dict[GroupIdT, measures.GroupMeasures]
    histories: Dict[PersonIdT, history.PersonHistory]
    scores: Sequence[rules.ViparScore]
    """Indexed by person id."""
    ranked: Sequence[PersonIdT]

    def tier_of(self, active_n: int, non_active_n: int) -> Dict[PersonIdT, Tier]:
        active, non_active = rules.split_tiers(self.ranked, active_n, non_active_n)
        tiers = dict.fromkeys(active, Tier.ACTIVE)
        tiers.update(dict.fromkeys(non_active, Tier.NON_ACTIVE))
        return tiers


@attr.frozen(kw_only=True)
class EvaluationResult:
    holdout: evaluation.HoldOut
    scoring: ScoringResult
    reports: Sequence[evaluation.EvaluationReport]
    comparisons: Sequence[evaluation.ListComparison]


@attr.frozen(kw_only=True)
class ValidationResult:
    fits: Dict[Category, stats.LogitFit]
    summaries: Dict[Category, List[stats.VariableSummary]]
    collinearity: Dict[Category, List[stats.CorrelationFlag]]
    victim_age_bands: List[rules.AgeBand]
    n_victims: int
