"""The ``vipar`` command line."""
from __future__ import annotations

import argparse
import logging
import pathlib
import sys
from typing import Sequence

from vipar.clients.base import VIPARPipeline
from vipar.io import exports
from vipar.io.config import RunConfig
from vipar.sansio import normalize
from vipar.sansio.exceptions import ViparError

logger = logging.getLogger(__name__)

# Flags naming an input that must exist, with the config field each one sets.
_INPUT_FLAGS = (
    ("--events-dir", "events_dir"),
    ("--cirv", "cirv"),
    ("--shootings", "shootings"),
    ("--ruleset", "ruleset"),
)


def _date(value: str):
    try:
        return normalize.parse_date(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid date {value!r}, expected YYYY-MM-DD"
        ) from None


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=pathlib.Path, help="YAML run configuration.")
    common.add_argument(
        "--events-dir", type=pathlib.Path, help="Directory holding the dataset files."
    )
    common.add_argument("--cirv", type=pathlib.Path, help="CIRV roster file.")
    common.add_argument(
        "--shootings", type=pathlib.Path, help="Shooting dataset, if kept elsewhere."
    )
    common.add_argument(
        "--ruleset", type=pathlib.Path, help="Rule set YAML (default: packaged rules)."
    )
    common.add_argument("--snapshot", type=_date, help="Scoring date (default: cutoff).")
    common.add_argument("--cutoff", type=_date, help="Last date of the training window.")
    common.add_argument("--recency-days", type=int, help="Width of the 'recent' window.")
    common.add_argument(
        "--pr-threshold", type=float, help="PageRank above which a friend is 'high'."
    )
    common.add_argument("--out", type=pathlib.Path, help="Output directory.")
    common.add_argument("--seed", type=int, help="Seed for synthetic data.")
    common.add_argument("--top-n", type=int, help="Print the N highest scores.")
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="Logging threshold (default: WARNING).",
    )
    common.add_argument(
        "-v", "--verbose", action="store_true", help="Shorthand for --log-level INFO."
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vipar",
        description="Co-offending network risk scoring and hold-out evaluation.",
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    common = _common()
    synth = commands.add_parser(
        "synth", parents=[common], help="Generate a synthetic corpus."
    )
    synth.add_argument(
        "--n-persons", type=int, default=1000, help="Population size (default: 1000)."
    )
    commands.add_parser(
        "ingest", parents=[common], help="Parse datasets and build the network."
    )
    commands.add_parser("score", parents=[common], help="Score every person.")
    commands.add_parser(
        "validate", parents=[common], help="Fit the validation regressions."
    )
    commands.add_parser(
        "evaluate", parents=[common], help="Evaluate ranked lists on the hold-out."
    )
    return parser


def make_config(
    parser: argparse.ArgumentParser, args: argparse.Namespace
) -> RunConfig:
    """Merge the config file and flags, failing with a usage error on missing inputs."""
    if args.config is not None and not args.config.is_file():
        parser.error(f"--config: no such file: {args.config}")
    config = RunConfig.from_yaml(args.config) if args.config else RunConfig()
    config = config.with_overrides(
        events_dir=args.events_dir,
        cirv=args.cirv,
        shootings=args.shootings,
        ruleset=args.ruleset,
        snapshot=args.snapshot,
        cutoff=args.cutoff,
        recency_days=args.recency_days,
        pr_threshold=args.pr_threshold,
        out=args.out,
        seed=args.seed,
        top_n=args.top_n,
        n_persons=getattr(args, "n_persons", None),
    )
    if args.command == "synth":
        return config
    if config.events_dir is None:
        parser.error("--events-dir is required")
    for flag, field in _INPUT_FLAGS:
        path = getattr(config, field)
        if path is not None and not path.exists():
            parser.error(f"{flag}: no such file or directory: {path}")
    return config


def run(command: str, pipeline: VIPARPipeline) -> None:
    if command == "synth":
        written = pipeline.synth()
        print(f"Wrote {len(written)} files to {written[0].parent}")
    elif command == "ingest":
        store = pipeline.ingest()
        print(f"{len(store.events)} events, {len(store.persons)} persons")
    elif command == "score":
        result = pipeline.score()
        top_n = pipeline.config.top_n
        if top_n:
            rows = []
            for pid in result.ranked[:top_n]:
                score = result.scores[pid]
                key = result.store.persons[pid].key
                rows.append(
                    (
                        pid,
                        key.full_name,
                        normalize.format_date(key.dob),
                        score.personal,
                        score.positional,
                        score.structural,
                        score.total,
                    )
                )
            print(
                exports.format_table(
                    (
                        "person_id",
                        "name",
                        "dob",
                        "personal",
                        "positional",
                        "structural",
                        "total",
                    ),
                    rows,
                ),
                end="",
            )
        else:
            print(f"Scored {len(result.scores)} persons")
    elif command == "validate":
        result = pipeline.validate()
        for category, fit in result.fits.items():
            print(f"{category.value} ({fit.n_observations} persons)")
            print(
                exports.format_table(
                    exports.LOGIT_HEADER,
                    ([row[k] for k in exports.LOGIT_HEADER] for row in fit.rows()),
                ),
                end="",
            )
    elif command == "evaluate":
        result = pipeline.evaluate()
        print(exports.format_reports(result.reports), end="")


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point. Returns 0 on success, 1 on a data error and 2 on a usage error."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    level = "INFO" if args.verbose and args.log_level == "WARNING" else args.log_level
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = make_config(parser, args)
    except SystemExit as e:
        return int(e.code or 0)
    except ViparError as e:
        print(f"{e.stage}: {e}", file=sys.stderr)
        return 1
    try:
        run(args.command, VIPARPipeline(config))
    except ViparError as e:
        print(f"{e.stage}: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"output: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
