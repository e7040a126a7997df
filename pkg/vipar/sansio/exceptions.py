"""Core exceptions raised by the scoring engine"""
from __future__ import annotations


class ViparError(Exception):
    stage = "vipar"


class ConfigError(ViparError):
    stage = "config"


class IngestError(ViparError):
    stage = "ingest"


class SchemaError(IngestError):
    pass


class RowError(IngestError):
    """A single malformed record.

    The reader hands these back as values rather than raising them, so one bad row
    never stops a file from being read.
    """

    def __init__(self, reason: str, *, row: int, path: str | None = None):
        self.reason = reason
        self.row = row
        self.path = path
        where = f"{path}: " if path else ""
        super().__init__(f"{where}row {row}: {reason}")


class DatasetReadError(IngestError, OSError):
    pass


class NetworkError(ViparError):
    stage = "network"


class UnknownPersonError(NetworkError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown person"


class MeasureError(ViparError):
    stage = "measures"


class ConvergenceError(MeasureError):
    def __init__(self, *args, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(*args)


class RuleError(ViparError, ValueError):
    stage = "rules"


class StatsError(ViparError):
    stage = "stats"


class NoOutcomeVariationError(StatsError):
    pass


class SeparationError(StatsError):
    pass


class ZeroVarianceError(StatsError):
    pass


class EvaluationError(ViparError):
    stage = "eval"


class SynthError(ViparError, ValueError):
    stage = "synth"


class CollinearityWarning(UserWarning):
    """Two predictors are correlated enough to shadow each other in a regression."""
