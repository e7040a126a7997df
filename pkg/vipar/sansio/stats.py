"""Validation statistics: logistic regression, correlation screening and summaries."""
from __future__ import annotations

import itertools
import logging
import warnings
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import attr
import numpy as np
from scipy import special, stats

from vipar.sansio import constants
from vipar.sansio.exceptions import (
    CollinearityWarning,
    NoOutcomeVariationError,
    SeparationError,
    StatsError,
    ZeroVarianceError,
)
from vipar.sansio.rules import Predicate
from vipar.sansio.types import Category, PersonIdT, RuleInputsT

logger = logging.getLogger(__name__)

__all__ = (
    "INTERCEPT",
    "PREDICTOR_SETS",
    "CorrelationFlag",
    "DesignMatrix",
    "LogitFit",
    "VariableSummary",
    "describe",
    "design_matrix",
    "log_likelihood",
    "log_likelihood_gradient",
    "logit_fit",
    "outcome_vector",
    "pearson_r",
    "screen_collinearity",
)

INTERCEPT = "(intercept)"


def _with_intercept(design: np.ndarray) -> np.ndarray:
    design = np.asarray(design, dtype=float)
    if design.ndim == 1:
        design = design[:, None]
    return np.column_stack((np.ones(design.shape[0]), design))


def _penalty(size: int, ridge: float) -> np.ndarray:
    # The intercept is never penalized.
    diag = np.full(size, float(ridge))
    diag[0] = 0.0
    return diag


def log_likelihood(
    coefficients: Sequence[float],
    design: np.ndarray,
    outcome: Sequence[int],
    ridge: float = 0.0,
) -> float:
    """The ridge-penalized Bernoulli log-likelihood.

    ``coefficients`` holds the intercept first, then one entry per design column.
    """
    b = np.asarray(coefficients, dtype=float)
    x = _with_intercept(design)
    y = np.asarray(outcome, dtype=float)
    eta = x @ b
    penalty = 0.5 * float(_penalty(b.size, ridge) @ (b * b))
    return float(y @ eta - np.logaddexp(0.0, eta).sum()) - penalty


def log_likelihood_gradient(
    coefficients: Sequence[float],
    design: np.ndarray,
    outcome: Sequence[int],
    ridge: float = 0.0,
) -> np.ndarray:
    b = np.asarray(coefficients, dtype=float)
    x = _with_intercept(design)
    y = np.asarray(outcome, dtype=float)
    return x.T @ (y - special.expit(x @ b)) - _penalty(b.size, ridge) * b


@attr.frozen(kw_only=True)
class LogitFit:
    """A fitted logistic regression, intercept first in every vector."""

    names: Tuple[str, ...]
    coefficients: Tuple[float, ...]
    std_errors: Tuple[float, ...]
    p_values: Tuple[float, ...]
    odds_ratios: Tuple[float, ...]
    converged: bool
    iterations: int
    ridge: float = 0.0
    n_observations: int = 0

    def coefficient(self, name: str) -> float:
        return self.coefficients[self.names.index(name)]

    def rows(self) -> List[Dict[str, float | str]]:
        """One report row per term, with the columns ``predictor, b, se, p, exp_b``."""
        return [
            {"predictor": n, "b": b, "se": se, "p": p, "exp_b": o}
            for n, b, se, p, o in zip(
                self.names,
                self.coefficients,
                self.std_errors,
                self.p_values,
                self.odds_ratios,
            )
        ]


def logit_fit(
    design: np.ndarray,
    outcome: Sequence[int],
    ridge: float = 0.0,
    names: Sequence[str] | None = None,
    *,
    tol: float = constants.LOGIT_TOL,
    max_iter: int = constants.LOGIT_MAX_ITER,
) -> LogitFit:
    """Fit a logistic regression by iteratively reweighted least squares.

    An intercept column is added to ``design``. Standard errors come from the inverse
    of the (penalized) information matrix at the optimum and p-values from a two-sided
    Wald z-test.

    Args:
        design: An ``(n, k)`` matrix of predictors.
        outcome: ``n`` binary outcomes.
        ridge: L2 penalty on every coefficient except the intercept.
        names: Names for the ``k`` predictor columns.
        tol: Convergence threshold on the largest coefficient change.
        max_iter: Iteration cap.

    Raises:
        StatsError: The shapes disagree or the system is singular with ``ridge > 0``.
        NoOutcomeVariationError: ``outcome`` holds a single class.
        SeparationError: The fit diverges without a ridge penalty.
    """
    x = _with_intercept(design)
    y = np.asarray(outcome, dtype=float)
    n, size = x.shape
    if y.shape != (n,):
        raise StatsError(
            f"Design has {n:,} rows but outcome has {y.size:,} entries."
        )
    if not np.isin(y, (0.0, 1.0)).all():
        raise StatsError("Outcome must be binary (0/1).")
    if y.min() == y.max():
        raise NoOutcomeVariationError("no outcome variation")
    if ridge < 0:
        raise StatsError(f"Ridge must be non-negative, got {ridge!r}.")
    if names is None:
        names = [f"x{i}" for i in range(1, size)]
    if len(names) != size - 1:
        raise StatsError(f"Expected {size - 1} predictor names, got {len(names)}.")

    penalty = np.diag(_penalty(size, ridge))
    b = np.zeros(size)
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        p = special.expit(x @ b)
        info = x.T @ (x * (p * (1 - p))[:, None]) + penalty
        gradient = x.T @ (y - p) - penalty @ b
        try:
            step = np.linalg.solve(info, gradient)
        except np.linalg.LinAlgError:
            _diverged(ridge, "the information matrix is singular")
            raise StatsError("The information matrix is singular.") from None
        b = b + step
        if not np.isfinite(b).all() or np.linalg.norm(b) > constants.SEPARATION_NORM:
            _diverged(ridge, "coefficients diverge")
        if np.abs(step).max() < tol:
            converged = True
            break
    if not converged:
        _diverged(ridge, f"no convergence after {max_iter} iterations")
        logger.warning("Logistic regression did not converge in %d iterations.", max_iter)

    p = special.expit(x @ b)
    info = x.T @ (x * (p * (1 - p))[:, None]) + penalty
    try:
        covariance = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        _diverged(ridge, "the information matrix is singular")
        raise StatsError("The information matrix is singular.") from None
    se = np.sqrt(np.diag(covariance))
    p_values = 2 * stats.norm.sf(np.abs(b / se))
    logger.debug("Logistic regression finished after %d iterations.", iteration)
    return LogitFit(
        names=(INTERCEPT, *names),
        coefficients=tuple(float(v) for v in b),
        std_errors=tuple(float(v) for v in se),
        p_values=tuple(float(v) for v in p_values),
        odds_ratios=tuple(float(v) for v in np.exp(b)),
        converged=converged,
        iterations=iteration,
        ridge=float(ridge),
        n_observations=n,
    )


def _diverged(ridge: float, detail: str):
    if ridge == 0:
        raise SeparationError(
            f"Possible perfect separation ({detail}); refit with ridge > 0."
        )


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    """The product-moment correlation of ``x`` and ``y``.

    Raises:
        StatsError: The vectors differ in length or hold fewer than two values.
        ZeroVarianceError: Either vector is constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("pearson_r needs two vectors of equal length.")
    if x.size < 2:
        raise StatsError("pearson_r needs at least two observations.")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = dx @ dx, dy @ dy
    if sxx == 0 or syy == 0:
        raise ZeroVarianceError("pearson_r is undefined for a constant vector.")
    return float(np.clip((dx @ dy) / np.sqrt(sxx * syy), -1.0, 1.0))


@attr.frozen(kw_only=True)
class CorrelationFlag:
    first: str
    second: str
    r: float
    hard: bool
    """True past the hard threshold; otherwise only past the warning threshold."""


def screen_collinearity(
    columns: Mapping[str, Sequence[float]],
    warn_r: float = constants.COLLINEARITY_WARN_R,
    flag_r: float = constants.COLLINEARITY_FLAG_R,
) -> List[CorrelationFlag]:
    """Pairwise correlations of predictors whose magnitude exceeds ``warn_r``.

    Pairs involving a constant column are skipped. Each pair found also issues a
    :py:class:`~vipar.sansio.exceptions.CollinearityWarning`.
    """
    flags = []
    for a, b in itertools.combinations(columns, 2):
        try:
            r = pearson_r(columns[a], columns[b])
        except ZeroVarianceError:
            continue
        if abs(r) <= warn_r:
            continue
        flag = CorrelationFlag(first=a, second=b, r=r, hard=abs(r) > flag_r)
        warnings.warn(
            CollinearityWarning(
                f"{a} and {b} are {'highly' if flag.hard else 'moderately'} "
                f"correlated (r={r:.3f})."
            ),
            stacklevel=2,
        )
        flags.append(flag)
    return flags


@attr.frozen(kw_only=True)
class VariableSummary:
    name: str
    n: int
    minimum: float
    maximum: float
    mean: float
    share_true: float | None = None
    """The proportion of ones, for binary variables only."""


def describe(columns: Mapping[str, Sequence[float]]) -> List[VariableSummary]:
    out = []
    for name, values in columns.items():
        v = np.asarray(values, dtype=float)
        if not v.size:
            raise StatsError(f"Cannot describe empty column {name!r}.")
        binary = bool(np.isin(v, (0.0, 1.0)).all())
        out.append(
            VariableSummary(
                name=name,
                n=int(v.size),
                minimum=float(v.min()),
                maximum=float(v.max()),
                mean=float(v.mean()),
                share_true=float(v.mean()) if binary else None,
            )
        )
    return out


# The three regressions of the validation workflow: (predictor, rule input, test).
# Without a test the raw input value is the predictor.
PREDICTOR_SETS: Dict[Category, Tuple[Tuple[str, str, Predicate | None], ...]] = {
    Category.PERSONAL: (
        ("age", "age", None),
        ("cirv_member", "cirv_member", None),
        (
            "recent_misdemeanors_ge2",
            "recent_misdemeanors_committed",
            Predicate(op=">=", value=2),
        ),
        ("misdemeanors_ge3", "misdemeanors_committed", Predicate(op=">=", value=3)),
        (
            "recent_firearm_incident",
            "recent_firearm_incidents",
            Predicate(op=">=", value=1),
        ),
    ),
    Category.POSITIONAL: (
        ("pagerank", "simplified_pagerank", None),
        ("high_pr_friend_d1", "high_pr_friend_d1", None),
        ("cirv_friend_d1", "cirv_friend_d1", None),
        ("cirv_friend_d2", "cirv_friend_d2", None),
        ("cirv_friend_d3", "cirv_friend_d3", None),
        ("shooting_friend_d1", "shooting_friend_d1", None),
        ("shooting_friend_d2", "shooting_friend_d2", None),
    ),
    Category.STRUCTURAL: (
        (
            "group_violent_crimes_gt3",
            "group_violent_crime_count",
            Predicate(op=">", value=3),
        ),
        (
            "group_violent_victimizations_gt3",
            "group_violent_victimization_count",
            Predicate(op=">", value=3),
        ),
        ("group_shootings_gt3", "group_shooting_count", Predicate(op=">", value=3)),
        ("group_members_gt20", "group_member_count", Predicate(op=">", value=20)),
    ),
}


@attr.frozen(kw_only=True)
class DesignMatrix:
    names: Tuple[str, ...]
    values: np.ndarray = attr.field(eq=False)
    person_ids: Tuple[PersonIdT, ...]

    def columns(self) -> Dict[str, np.ndarray]:
        return {n: self.values[:, i] for i, n in enumerate(self.names)}


def design_matrix(
    inputs: Mapping[PersonIdT, RuleInputsT], category: Category
) -> DesignMatrix:
    """Build one regression's predictor matrix from every person's rule inputs.

    Persons missing any input (for example an age without a date of birth) are left
    out. Constant columns cannot be estimated and are dropped with a warning.
    """
    predictors = PREDICTOR_SETS[category]
    rows: List[List[float]] = []
    kept: List[PersonIdT] = []
    for pid in sorted(inputs):
        values = inputs[pid]
        row = []
        for _, source, test in predictors:
            observed = values.get(source)
            if observed is None:
                break
            row.append(float(test(observed) if test is not None else observed))
        else:
            rows.append(row)
            kept.append(pid)
    if len(kept) < len(inputs):
        logger.info(
            "Left %d persons with missing inputs out of the %s design.",
            len(inputs) - len(kept),
            category.value,
        )
    matrix = np.asarray(rows, dtype=float).reshape(len(rows), len(predictors))
    keep = [i for i in range(len(predictors)) if np.ptp(matrix[:, i]) > 0] if rows else []
    for i in range(len(predictors)):
        if i not in keep:
            logger.warning(
                "Dropping constant predictor %s from the %s regression.",
                predictors[i][0],
                category.value,
            )
    return DesignMatrix(
        names=tuple(predictors[i][0] for i in keep),
        values=matrix[:, keep],
        person_ids=tuple(kept),
    )


def outcome_vector(
    person_ids: Iterable[PersonIdT], positives: Iterable[PersonIdT]
) -> np.ndarray:
    positives = set(positives)
    return np.array([pid in positives for pid in person_ids], dtype=float)
