"""Contingency tables, Pearson chi-squared statistics and the chi-squared distribution."""

import math
from collections.abc import Sequence
from typing import Any

import numpy as np
import pandas as pd

from app.core.errors import DegenerateDataError, InvalidParameterError
from app.schemas.dataset import FeatureAssociation
from app.schemas.stats import ChiSquareResult, ContingencyTable, Stratum

GAMMA_TOLERANCE = 1e-14
GAMMA_MAX_ITER = 10_000
_TINY = 1e-300


def _binary(values: Any, name: str) -> np.ndarray:
    array = np.asarray(values)
    if array.size and not np.isin(array, (0, 1)).all():
        raise InvalidParameterError(f"{name} must be binary")
    return array.astype(int)


def build_table(a: Any, b: Any, strata: Any | None = None) -> ContingencyTable:
    """Stratified 2x2 counts of (A, B); one stratum per distinct label, in sorted label order."""
    a_values, b_values = _binary(a, "a"), _binary(b, "b")
    if a_values.shape != b_values.shape:
        raise InvalidParameterError(f"length mismatch: {a_values.size} vs {b_values.size}")
    if strata is None:
        labels = np.array(["all"])
        inverse = np.zeros(a_values.size, dtype=int)
    else:
        strata_values = np.asarray(strata)
        if strata_values.shape != a_values.shape:
            raise InvalidParameterError(f"length mismatch: {strata_values.size} strata labels vs {a_values.size}")
        labels, inverse = np.unique(strata_values, return_inverse=True)

    # cell index: row 0 is A=1, column 0 is B=1
    cells = inverse * 4 + (1 - a_values) * 2 + (1 - b_values)
    counts = np.bincount(cells, minlength=4 * len(labels)).reshape(len(labels), 2, 2)
    return ContingencyTable(
        strata=[
            Stratum(label=str(label), counts=((int(c[0, 0]), int(c[0, 1])), (int(c[1, 0]), int(c[1, 1]))))
            for label, c in zip(labels, counts, strict=True)
        ]
    )


def pearson_chi2_stratum(stratum: Stratum) -> ChiSquareResult:
    """Pearson statistic of one 2x2 stratum, without continuity correction.

    A zero margin makes the stratum degenerate: statistic 0, no degree of freedom, p-value 1.
    """
    total = stratum.total
    if total == 0:
        raise DegenerateDataError(f"stratum {stratum.label} is empty")
    rows, cols = stratum.row_totals, stratum.column_totals
    if 0 in rows or 0 in cols:
        return ChiSquareResult(statistic=0.0, dof=0, p_value=1.0, degenerate=True)

    statistic = 0.0
    for u in range(2):
        for v in range(2):
            expected = rows[u] * cols[v] / total
            if expected > 0:
                statistic += (stratum.counts[u][v] - expected) ** 2 / expected
    return ChiSquareResult(statistic=statistic, dof=1, p_value=chi2_sf(statistic, 1), degenerate=False)


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * GAMMA_TOLERANCE:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_fraction(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by modified Lentz continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < GAMMA_TOLERANCE:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_upper_gamma(a: float, x: float) -> float:
    if a <= 0:
        raise InvalidParameterError("shape must be positive")
    if x < 0:
        raise InvalidParameterError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _lower_gamma_series(a, x)))
    return min(1.0, max(0.0, _upper_gamma_fraction(a, x)))


def chi2_sf(x: float, dof: int) -> float:
    """Upper-tail probability of the chi-squared distribution, Q(dof/2, x/2)."""
    if dof < 1 or int(dof) != dof:
        raise InvalidParameterError(f"degrees of freedom must be a positive integer, got {dof}")
    if x < 0:
        raise InvalidParameterError(f"chi-squared value must be non-negative, got {x}")
    return regularized_upper_gamma(dof / 2.0, x / 2.0)


def chi2_quantile(p: float, dof: int) -> float:
    """Inverse CDF: the value whose upper tail is ``1 - p``, found by bracketing then bisection."""
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"probability must lie in (0, 1), got {p}")
    if dof < 1 or int(dof) != dof:
        raise InvalidParameterError(f"degrees of freedom must be a positive integer, got {dof}")
    tail = 1.0 - p
    lo, hi = 0.0, float(max(dof, 1))
    while chi2_sf(hi, dof) > tail:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if chi2_sf(mid, dof) > tail:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cramers_v(x: Sequence[Any], y: Sequence[Any]) -> float:
    """Cramer's V of two categorical sequences; continuous inputs must be binned first."""
    x_values, y_values = pd.Series(np.asarray(x)), pd.Series(np.asarray(y))
    if len(x_values) != len(y_values):
        raise InvalidParameterError(f"length mismatch: {len(x_values)} vs {len(y_values)}")
    table = pd.crosstab(x_values, y_values).to_numpy(dtype=float)
    r, c = table.shape
    if r < 2 or c < 2:
        raise DegenerateDataError("Cramer's V needs at least two observed levels in each variable")
    n = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / n
    statistic = float(((table - expected) ** 2 / expected).sum())
    return min(1.0, math.sqrt(statistic / (n * min(r - 1, c - 1))))


def _binned(column: pd.Series, bins: int) -> pd.Series:
    if column.nunique() <= bins:
        return column.astype(str)
    return pd.qcut(column, q=bins, duplicates="drop").astype(str)


def association_table(d: Any, bins: int = 5, rows: np.ndarray | None = None) -> list[FeatureAssociation]:
    """Cramer's V of every non-target, non-protected column against the target and the protected attribute.

    Numeric columns with more than ``bins`` distinct values are cut into quantile bins. ``rows``
    restricts the computation to a subset (one risk class, for instance).
    """
    frame = d.frame if rows is None else d.frame.iloc[rows]
    target, protected = frame[d.target_name], frame[d.protected_name]
    associations: list[FeatureAssociation] = []
    if target.nunique() < 2 or protected.nunique() < 2:
        return associations
    for spec in d.specs:
        if spec.role in ("target", "protected"):
            continue
        column = frame[spec.name]
        values = column.astype(str) if spec.kind == "categorical" else _binned(column, bins)
        if values.nunique() < 2:
            continue
        associations.append(
            FeatureAssociation(
                feature=spec.name,
                v_target=cramers_v(values.to_numpy(), target.to_numpy()),
                v_protected=cramers_v(values.to_numpy(), protected.to_numpy()),
            )
        )
    return associations
