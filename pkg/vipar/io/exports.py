"""Deterministic CSV, JSON and plain-text renderings of pipeline results."""
from __future__ import annotations

import csv
import decimal
import json
import logging
import pathlib
from typing import Any, Iterable, List, Mapping, Sequence, Union

import attr

from vipar.sansio import normalize
from vipar.sansio.engine import ScoringResult, ValidationResult
from vipar.sansio.evaluation import EvaluationReport, ListComparison
from vipar.sansio.measures import GroupMeasures, PersonMeasures
from vipar.sansio.network import CoOffendingGraph, Group, SourceSummary
from vipar.sansio.rules import AgeBand
from vipar.sansio.stats import LogitFit
from vipar.sansio.types import Tier

logger = logging.getLogger(__name__)

PathT = Union[str, pathlib.Path]

SCORE_HEADER = (
    "rank",
    "person_id",
    "name",
    "dob",
    "tier",
    "personal",
    "positional",
    "structural",
    "total",
    "fired_rules",
)
REPORT_HEADER = (
    "list_name",
    "tier",
    "n_list",
    "n_outcomes",
    "n_hits",
    "n_excluded",
    "hit_rate_percent",
)
LOGIT_HEADER = ("predictor", "b", "se", "p", "exp_b")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, decimal.Decimal):
        return str(value)
    if isinstance(value, Tier):
        return value.value
    return str(value)


def write_rows(path: PathT, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.debug("Wrote %d rows to %s.", count, path)
    return count


def write_json(path: PathT, payload: Mapping[str, Any]):
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
    )


def write_scores(
    path: PathT, result: ScoringResult, *, active_n: int, non_active_n: int
) -> int:
    """Every scored person in rank order, with the tier their rank falls in."""
    tiers = result.tier_of(active_n, non_active_n)
    persons = result.store.persons

    def rows():
        for position, pid in enumerate(result.ranked, start=1):
            score = result.scores[pid]
            key = persons[pid].key
            yield (
                position,
                pid,
                key.full_name,
                normalize.format_date(key.dob),
                tiers.get(pid, ""),
                score.personal,
                score.positional,
                score.structural,
                score.total,
                "|".join(rule_id for rule_id, _ in score.fired_rules),
            )

    return write_rows(path, SCORE_HEADER, rows())


def write_measures(path: PathT, result: ScoringResult) -> int:
    fields = [a.name for a in attr.fields(PersonMeasures)]
    return write_rows(
        path,
        ("person_id", "group_id", *fields),
        (
            (pid, result.membership[pid], *attr.astuple(result.measures[pid]))
            for pid in sorted(result.measures)
        ),
    )


def write_group_measures(path: PathT, result: ScoringResult) -> int:
    fields = [a.name for a in attr.fields(GroupMeasures)]
    return write_rows(
        path,
        ("group_id", *fields),
        (
            (gid, *attr.astuple(result.group_measures[gid]))
            for gid in sorted(result.group_measures)
        ),
    )


def write_edges(path: PathT, graph: CoOffendingGraph) -> int:
    edges = graph.edges
    return write_rows(
        path,
        ("source", "target", "shared_events"),
        ((u, v, edges[(u, v)]) for u, v in sorted(edges)),
    )


def write_components(path: PathT, groups: Iterable[Group]) -> int:
    return write_rows(
        path,
        ("person_id", "group_id"),
        sorted((pid, g.group_id) for g in groups for pid in g.members),
    )


def write_network_summary(path: PathT, summaries: Iterable[SourceSummary]) -> int:
    return write_rows(
        path,
        ("source", "individuals", "relationships", "average_relationships"),
        (
            (s.source, s.individuals, s.relationships, s.average_relationships)
            for s in summaries
        ),
    )


def _report_row(r: EvaluationReport) -> tuple:
    return (
        r.list_name,
        r.tier,
        r.n_list,
        r.n_outcomes,
        r.n_hits,
        r.n_excluded,
        f"{r.hit_rate_percent:.1f}",
    )


def write_reports(path: PathT, reports: Iterable[EvaluationReport]) -> int:
    return write_rows(path, REPORT_HEADER, map(_report_row, reports))


def write_comparisons(path: PathT, comparisons: Iterable[ListComparison]) -> int:
    return write_rows(
        path,
        ("first", "second", "tier", "first_rate", "second_rate", "ratio"),
        (
            (c.first, c.second, c.tier, c.first_rate, c.second_rate, c.ratio)
            for c in comparisons
        ),
    )


def write_logit(path: PathT, fit: LogitFit) -> int:
    return write_rows(
        path, LOGIT_HEADER, ([row[k] for k in LOGIT_HEADER] for row in fit.rows())
    )


def write_validation(out_dir: PathT, result: ValidationResult) -> List[pathlib.Path]:
    """One regression table, one descriptive table and one collinearity table per
    category, plus the age-band table of hold-out victims."""
    out = pathlib.Path(out_dir)
    written = []
    for category, fit in result.fits.items():
        name = category.value
        write_logit(out / f"logit_{name}.csv", fit)
        write_rows(
            out / f"describe_{name}.csv",
            ("variable", "n", "min", "max", "mean", "share_true"),
            (
                (s.name, s.n, s.minimum, s.maximum, s.mean, s.share_true)
                for s in result.summaries[category]
            ),
        )
        write_rows(
            out / f"collinearity_{name}.csv",
            ("first", "second", "r", "hard"),
            ((c.first, c.second, c.r, c.hard) for c in result.collinearity[category]),
        )
        written.extend(
            out / f"{kind}_{name}.csv" for kind in ("logit", "describe", "collinearity")
        )
    path = out / "victim_age_bands.csv"
    write_age_bands(path, result.victim_age_bands)
    written.append(path)
    return written


def write_age_bands(path: PathT, bands: Iterable[AgeBand]) -> int:
    return write_rows(
        path,
        ("band", "count", "min_weight", "max_weight"),
        ((b.label, b.count, b.min_weight, b.max_weight) for b in bands),
    )


def format_table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as a left-aligned plain-text table."""
    cells = [list(header)] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def format_reports(reports: Iterable[EvaluationReport]) -> str:
    return format_table(REPORT_HEADER, map(_report_row, reports))
