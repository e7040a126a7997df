"""Run configuration: an optional YAML file, overridden by command-line flags."""
from __future__ import annotations

import datetime
import logging
import pathlib
from typing import Any, Dict, Mapping, Union

import attr
import yaml

from vipar.sansio import constants, engine, normalize
from vipar.sansio.exceptions import ConfigError, RuleError
from vipar.sansio.rules import RuleSet, default_ruleset

logger = logging.getLogger(__name__)

__all__ = ("RunConfig", "load_ruleset")

PathT = Union[str, pathlib.Path]


def load_ruleset(path: PathT | None = None) -> RuleSet:
    """Load a rule set file, or the packaged default when ``path`` is None.

    Raises:
        ConfigError: The file cannot be read or does not describe a valid rule set.
    """
    try:
        if path is None:
            return default_ruleset()
        return RuleSet.from_yaml(pathlib.Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"{path}: cannot read rule set: {e}") from e
    except RuleError as e:
        raise ConfigError(f"{path or 'default rule set'}: {e}") from e


def _date(value):
    if value is None or isinstance(value, datetime.date):
        return value
    try:
        return normalize.parse_date(str(value))
    except ValueError:
        raise ConfigError(f"Invalid date {value!r}; expected YYYY-MM-DD.") from None


def _path(value):
    return None if value is None else pathlib.Path(value)


@attr.s(kw_only=True, slots=True, auto_attribs=True)
class RunConfig:
    """Everything one CLI run needs. Unset fields take the documented defaults."""

    events_dir: pathlib.Path | None = attr.field(default=None, converter=_path)
    cirv: pathlib.Path | None = attr.field(default=None, converter=_path)
    shootings: pathlib.Path | None = attr.field(default=None, converter=_path)
    ruleset: pathlib.Path | None = attr.field(default=None, converter=_path)
    out: pathlib.Path = attr.field(default=pathlib.Path("out"), converter=pathlib.Path)
    study_start: datetime.date = attr.field(default=constants.STUDY_START, converter=_date)
    study_end: datetime.date = attr.field(default=constants.STUDY_END, converter=_date)
    cutoff: datetime.date = attr.field(default=constants.STUDY_CUTOFF, converter=_date)
    snapshot: datetime.date | None = attr.field(default=None, converter=_date)
    """Defaults to the cutoff."""
    recency_days: int | None = None
    pr_threshold: float | None = None
    active_n: int | None = None
    """Defaults to the CIRV roster's counts."""
    non_active_n: int | None = None
    ridge: float = 0.0
    top_n: int | None = None
    seed: int = 0
    n_persons: int | None = None

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> RunConfig:
        names = {a.name for a in attr.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}.")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid configuration: {e}") from e

    @classmethod
    def from_yaml(cls, path: PathT) -> RunConfig:
        try:
            data = yaml.safe_load(pathlib.Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"{path}: cannot read configuration: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: configuration is not valid YAML: {e}") from e
        if data is None:
            data = {}
        if not isinstance(data, Mapping):
            raise ConfigError(f"{path}: configuration must be a mapping.")
        return cls.from_mapping(data)

    def with_overrides(self, **flags: Any) -> RunConfig:
        """A copy with every flag that was actually given (not None) applied."""
        given = {k: v for k, v in flags.items() if v is not None}
        try:
            return attr.evolve(self, **given)
        except TypeError as e:
            raise ConfigError(f"Invalid override: {e}") from e

    def to_mapping(self) -> Dict[str, Any]:
        def plain(value):
            if isinstance(value, pathlib.Path):
                return str(value)
            if isinstance(value, datetime.date):
                return value.isoformat()
            return value

        return {k: plain(v) for k, v in attr.asdict(self).items()}

    def write_effective(self, out_dir: PathT | None = None) -> pathlib.Path:
        out = pathlib.Path(out_dir or self.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "effective_config.yaml"
        path.write_text(
            yaml.safe_dump(self.to_mapping(), sort_keys=True), encoding="utf-8"
        )
        return path

    @property
    def window(self):
        return self.study_start, self.study_end

    def make_engine(self) -> engine.ViparEngine:
        return engine.ViparEngine(
            window_info=engine.WindowInfo(
                study_start=self.study_start,
                study_end=self.study_end,
                cutoff=self.cutoff,
                snapshot=self.snapshot or self.cutoff,
                recency_days=self.recency_days,
            ),
            measure_info=engine.MeasureInfo(pr_threshold=self.pr_threshold),
            scoring_info=engine.ScoringInfo(
                ruleset=load_ruleset(self.ruleset),
                active_n=self.active_n,
                non_active_n=self.non_active_n,
            ),
            validation_info=engine.ValidationInfo(ridge=self.ridge),
        )
