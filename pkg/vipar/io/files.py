"""Dataset files: chunked reading through the Sans-IO reader, and corpus writing."""
from __future__ import annotations

import csv
import datetime
import logging
import pathlib
from concurrent import futures
from typing import Dict, List, Tuple, Union

import attr

from vipar.sansio import constants, normalize
from vipar.sansio.events import CirvEntry, EventRecord, PersonKey
from vipar.sansio.exceptions import DatasetReadError, IngestError, RowError, SchemaError
from vipar.sansio.reader import CIRV_SCHEMA, RowReader
from vipar.sansio.synth import GroundTruth, SyntheticCorpus
from vipar.sansio.types import EventType
from vipar.sansio.writer import RowWriter

logger = logging.getLogger(__name__)

__all__ = (
    "ParsedDataset",
    "collect_errors",
    "load_cirv",
    "load_datasets",
    "load_ground_truth",
    "parse_events",
    "read_dataset",
    "write_corpus",
)

PathT = Union[str, pathlib.Path]
WindowT = Tuple[datetime.date, datetime.date]


@attr.frozen(kw_only=True)
class ParsedDataset:
    path: str
    records: Tuple[Union[EventRecord, CirvEntry], ...]
    errors: Tuple[RowError, ...] = ()


def read_dataset(
    path: PathT,
    schema: EventType | str,
    *,
    window: WindowT | None = None,
    read_size: int = constants.READ_SIZE,
) -> ParsedDataset:
    """Stream one dataset file through a :py:class:`~vipar.sansio.reader.RowReader`.

    Raises:
        DatasetReadError: The file cannot be read.
        SchemaError: The header does not match ``schema``, or the file is empty.
    """
    path = str(path)
    reader = RowReader(schema, window=window, path=path)
    records: list = []
    errors: List[RowError] = []

    def drain():
        for res in reader:
            (errors if isinstance(res, RowError) else records).append(res)

    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            while True:
                chunk = f.read(read_size)
                if not chunk:
                    break
                reader.feed(chunk)
                drain()
    except OSError as e:
        raise DatasetReadError(f"{path}: cannot read dataset: {e}") from e
    reader.feed_eof()
    drain()
    if not reader.header_seen:
        raise SchemaError(f"{path}: file is empty, expected a {reader.header!r} header")
    logger.info("Parsed %s: %d records, %d row errors.", path, len(records), len(errors))
    return ParsedDataset(path=path, records=tuple(records), errors=tuple(errors))


def _settle(parsed: ParsedDataset, errors: str) -> ParsedDataset:
    if errors not in ("raise", "collect"):
        raise ValueError(f"errors must be 'raise' or 'collect', got {errors!r}")
    if parsed.errors and errors == "raise":
        raise parsed.errors[0]
    for err in parsed.errors:
        logger.warning("%s", err)
    return parsed


def parse_events(
    path: PathT,
    schema: EventType | str,
    *,
    window: WindowT | None = None,
    errors: str = "raise",
) -> ParsedDataset:
    """Parse an event dataset.

    Args:
        path: The dataset file.
        schema: The event type every row must carry.
        window: Optional study window; rows dated outside it are row errors.
        errors: ``"raise"`` raises the first row error; ``"collect"`` logs each one and
            returns them alongside the records.
    """
    return _settle(read_dataset(path, schema, window=window), errors)


def load_cirv(path: PathT, *, errors: str = "raise") -> ParsedDataset:
    return _settle(read_dataset(path, CIRV_SCHEMA), errors)


def load_datasets(
    events_dir: PathT,
    *,
    shootings: PathT | None = None,
    window: WindowT | None = None,
    errors: str = "collect",
    max_workers: int | None = None,
) -> Dict[EventType, ParsedDataset]:
    """Parse every dataset under ``events_dir`` concurrently.

    A dataset whose file is absent is skipped with a warning. ``shootings`` overrides
    the location of the shooting dataset.
    """
    root = pathlib.Path(events_dir)
    paths: Dict[EventType, pathlib.Path] = {}
    for name, filename in constants.DATASET_FILES.items():
        etype = EventType(name)
        path = root / filename
        if etype is EventType.SHOOTING and shootings:
            path = pathlib.Path(shootings)
        if path.is_file():
            paths[etype] = path
        else:
            logger.warning("No %s dataset at %s; skipping it.", etype.value, path)
    if not paths:
        raise DatasetReadError(f"{root}: no dataset files found")
    with futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
        pending = {
            etype: pool.submit(read_dataset, path, etype, window=window)
            for etype, path in paths.items()
        }
        parsed = {etype: fut.result() for etype, fut in pending.items()}
    return {etype: _settle(p, errors) for etype, p in parsed.items()}


def collect_errors(datasets: Dict[EventType, ParsedDataset]) -> List[IngestError]:
    return [e for d in datasets.values() for e in d.errors]


def write_corpus(corpus: SyntheticCorpus, out_dir: PathT) -> List[pathlib.Path]:
    """Write a synthetic corpus as the dataset files plus CIRV and ground truth."""
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    writer = RowWriter()
    written = []
    for name, filename in constants.DATASET_FILES.items():
        path = out / filename
        path.write_text(
            writer.pack_events(corpus.events.get(EventType(name), ())), encoding="utf-8"
        )
        written.append(path)
    path = out / constants.CIRV_FILE
    path.write_text(writer.pack_cirv_list(corpus.cirv), encoding="utf-8")
    written.append(path)
    path = out / constants.GROUND_TRUTH_FILE
    with path.open("w", encoding="utf-8", newline="") as f:
        rows = csv.writer(f, lineterminator="\n")
        rows.writerow(constants.GROUND_TRUTH_HEADER)
        for truth in corpus.ground_truth:
            rows.writerow(
                (
                    truth.person_id,
                    truth.key.full_name,
                    normalize.format_date(truth.key.dob),
                    f"{truth.planted_risk:.6f}",
                )
            )
    written.append(path)
    logger.info("Wrote %d files to %s.", len(written), out)
    return written


def load_ground_truth(path: PathT) -> List[GroundTruth]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise DatasetReadError(f"{path}: cannot read ground truth: {e}") from e
    if not rows or tuple(rows[0]) != constants.GROUND_TRUTH_HEADER:
        raise SchemaError(f"{path}: expected a {constants.GROUND_TRUTH_HEADER!r} header")
    return [
        GroundTruth(
            person_id=int(pid),
            key=PersonKey(full_name=name, dob=normalize.parse_optional_date(dob)),
            planted_risk=float(risk),
        )
        for pid, name, dob, risk in rows[1:]
    ]
