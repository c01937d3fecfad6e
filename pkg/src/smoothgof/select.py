"""Ordered coefficient selection by penalized cumulative energy.

Coefficients are ranked by squared magnitude; the selected count maximizes
the cumulative squared sum minus a per-term penalty, 2/n for the AIC flavor
and log(n)/n for the BIC flavor.  The empty set is allowed: under a true
model with a heavy penalty it is the honest maximizer, and the downstream
deviance bound remains valid there because the trimmed statistic is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .estimate import CoefficientSet

__all__ = ["SelectionResult", "select", "penalty_per_term"]

_CRITERIA = ("aic", "bic")


def penalty_per_term(criterion: str, n: int) -> float:
    if criterion == "aic":
        return 2.0 / n
    if criterion == "bic":
        return math.log(n) / n
    raise DomainError(f"criterion must be one of {_CRITERIA}, got {criterion!r}")


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of the ordered selection rule.

    ``order`` permutes coefficient positions by decreasing squared estimate
    (ties broken by enumeration order), ``criterion_path[K]`` is the
    criterion value of keeping the K largest, and ``active`` lists the
    positions of the k_star leading coefficients.
    """

    criterion: str
    order: np.ndarray
    k_star: int
    criterion_path: np.ndarray

    @property
    def active(self) -> np.ndarray:
        return self.order[: self.k_star]


def select(coeffs: CoefficientSet, criterion: str = "aic") -> SelectionResult:
    """Choose how many ranked coefficients to keep.

    The penalized path has nonincreasing increments once the coefficients
    are sorted, so the argmax is also the last index whose increment is
    positive; ties resolve to the smallest count.
    """
    criterion = str(criterion).lower()
    if coeffs.n < 2:
        raise DomainError("selection needs at least two observations")
    pen = penalty_per_term(criterion, coeffs.n)
    sq = coeffs.theta ** 2
    order = np.argsort(-sq, kind="stable")
    path = np.concatenate([[0.0], np.cumsum(sq[order] - pen)])
    k_star = int(np.argmax(path))
    return SelectionResult(criterion, order, k_star, path)
