from __future__ import annotations

import logging
import pathlib
import statistics
from typing import Any, Dict, List, Tuple

from vipar.io import exports, files
from vipar.io.config import RunConfig
from vipar.sansio import constants, network, synth
from vipar.sansio.engine import (
    EvaluationResult,
    ScoringResult,
    ValidationResult,
    ViparEngine,
)
from vipar.sansio.events import CirvEntry, EventRecord
from vipar.sansio.exceptions import ConfigError
from vipar.sansio.identity import EventStore, dedupe_events

logger = logging.getLogger(__name__)


class VIPARPipeline:
    """Runs pipeline stages against files on disk and writes their artifacts.

    Every stage reads its inputs from the locations in the :py:class:`RunConfig`,
    hands the parsed records to a :py:class:`~vipar.sansio.engine.ViparEngine` and
    writes deterministic outputs under ``config.out``.
    """

    __slots__ = ("config", "engine")

    def __init__(self, config: RunConfig, *, engine: ViparEngine = None):
        self.config = config
        self.engine = engine or config.make_engine()

    @property
    def out(self) -> pathlib.Path:
        return self.config.out

    def synth(self) -> List[pathlib.Path]:
        cfg = self.config
        options: Dict[str, Any] = dict(
            seed=cfg.seed, start=cfg.study_start, cutoff=cfg.cutoff, end=cfg.study_end
        )
        if cfg.n_persons is not None:
            options["n_persons"] = cfg.n_persons
            options["n_groups"] = max(1, cfg.n_persons * 12 // 100)
        corpus = synth.generate(synth.SynthConfig(**options))
        target = cfg.events_dir or self.out
        written = files.write_corpus(corpus, target)
        cfg.write_effective(self.out)
        return written

    def load(self) -> Tuple[List[EventRecord], List[CirvEntry], Dict[str, int]]:
        """Parse every dataset and the CIRV roster, collecting row errors."""
        cfg = self.config
        if cfg.events_dir is None:
            raise ConfigError("No events directory configured.")
        datasets = files.load_datasets(
            cfg.events_dir, shootings=cfg.shootings, window=cfg.window
        )
        errors = files.collect_errors(datasets)
        events, duplicates = dedupe_events(
            r for d in datasets.values() for r in d.records
        )
        for err in duplicates:
            logger.warning("Dropping record: %s", err)
        errors.extend(duplicates)
        cirv: List[CirvEntry] = []
        cirv_path = cfg.cirv or cfg.events_dir / constants.CIRV_FILE
        if cfg.cirv is not None or cirv_path.is_file():
            parsed = files.load_cirv(cirv_path, errors="collect")
            cirv = list(parsed.records)
            errors.extend(parsed.errors)
        else:
            logger.warning("No CIRV list at %s; continuing without one.", cirv_path)
        if errors:
            exports.write_rows(
                self.out / "row_errors.csv",
                ("path", "row", "reason"),
                ((e.path, e.row, e.reason) for e in errors),
            )
        counts = {etype.value: len(d.records) for etype, d in datasets.items()}
        counts["cirv"] = len(cirv)
        counts["row_errors"] = len(errors)
        logger.info(
            "Loaded %d events and %d CIRV entries (%d row errors).",
            len(events),
            len(cirv),
            len(errors),
        )
        return events, cirv, counts

    def ingest(self) -> EventStore:
        events, cirv, counts = self.load()
        snapshot = self.engine.window_info.snapshot
        store = EventStore.build(
            [e for e in events if e.date <= snapshot], snapshot=snapshot, cirv=cirv
        )
        graph = network.build_graph(store.events, store.persons)
        groups = network.components(graph)
        out = self.out
        exports.write_network_summary(
            out / "network_summary.csv", network.source_summary(store.events, store.index)
        )
        exports.write_edges(out / "edges.csv", graph)
        exports.write_components(out / "components.csv", groups)
        exports.write_json(
            out / "ingest_summary.json",
            {
                "records": counts,
                "snapshot": snapshot.isoformat(),
                "events": len(store.events),
                "persons": len(store.persons),
                "relationships": len(graph.edges),
                "groups": len(groups),
            },
        )
        self.config.write_effective(out)
        return store

    def score(self) -> ScoringResult:
        events, cirv, _ = self.load()
        result = self.engine.score(events, cirv)
        active_n, non_active_n = self.engine.tier_sizes(cirv)
        out = self.out
        exports.write_scores(
            out / "scores.csv", result, active_n=active_n, non_active_n=non_active_n
        )
        exports.write_measures(out / "measures.csv", result)
        exports.write_group_measures(out / "group_measures.csv", result)
        totals = [float(s.total) for s in result.scores]
        summary = {
            "persons": len(totals),
            "snapshot": result.store.snapshot.isoformat(),
            "min_total": min(totals, default=0.0),
            "max_total": max(totals, default=0.0),
            "mean_total": statistics.fmean(totals) if totals else 0.0,
        }
        logger.info(
            "Scores range from %.2f to %.2f (mean %.2f).",
            summary["min_total"],
            summary["max_total"],
            summary["mean_total"],
        )
        exports.write_json(out / "score_summary.json", summary)
        self.config.write_effective(out)
        return result

    def validate(self) -> ValidationResult:
        events, cirv, _ = self.load()
        result = self.engine.validate(events, cirv)
        exports.write_validation(self.out / "validation", result)
        self.config.write_effective(self.out)
        return result

    def evaluate(self) -> EvaluationResult:
        events, cirv, _ = self.load()
        result = self.engine.evaluate(events, cirv)
        out = self.out
        exports.write_reports(out / "reports.csv", result.reports)
        exports.write_comparisons(out / "comparisons.csv", result.comparisons)
        exports.write_json(
            out / "evaluation_summary.json",
            {
                "cutoff": self.engine.window_info.cutoff.isoformat(),
                "holdout_shootings": result.holdout.n_shootings,
                "reports": [r.as_dict() for r in result.reports],
                "comparisons": [c.as_dict() for c in result.comparisons],
            },
        )
        self.config.write_effective(out)
        return result
