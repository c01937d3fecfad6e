"""Deviance tests, selection-robust p-values, and per-subset diagnostics.

The deviance is n times the squared norm of the coefficient vector; under
the hypothesized model it is asymptotically chi-squared with one degree of
freedom per basis function.  After data-driven selection the trimmed
statistic is never larger than the full one, so referencing it against the
full degrees of freedom gives a p-value bound that stays valid whatever the
selection chose.  The same argument applies coordinate-subset-wise, which
yields a table decomposing mismodeling across sub-vectors, provided each
subset contains every coordinate its members condition on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import enumerate_K
from .errors import MarginalityError
from .estimate import CoefficientSet
from .model import ModelSpec
from .numeric import chi2_log10sf, chi2_sf
from .select import SelectionResult

__all__ = [
    "DevianceReport",
    "DiagnosticRow",
    "deviance_test",
    "diagnose",
    "diagnostic_table",
    "subset_index_mask",
]


@dataclass(frozen=True)
class DevianceReport:
    """Deviance statistic with its reference distribution and p-value.

    ``adjusted`` marks the selection-robust bound: the statistic sums only
    the selected coefficients but the degrees of freedom stay at the full
    count M.
    """

    statistic: float
    df: int
    p_value: float
    log10_p_value: float
    adjusted: bool
    k_star: int
    m: int
    active: tuple[tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "log10_p_value": self.log10_p_value,
            "adjusted": self.adjusted,
            "k_star": self.k_star,
            "m": self.m,
            "active": [list(k) for k in self.active],
        }


@dataclass(frozen=True)
class DiagnosticRow:
    """One line of the diagnostic table: a subset and its trimmed deviance."""

    subset: tuple[int, ...]
    labels: tuple[str, ...]
    m_q: int
    statistic: float
    p_value: float
    log10_p_value: float

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "labels": list(self.labels),
            "df": self.m_q,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "log10_p_value": self.log10_p_value,
        }


def deviance_test(
    coeffs: CoefficientSet, selection: SelectionResult | None = None
) -> DevianceReport:
    """Test that every expansion coefficient vanishes.

    Without a selection the statistic uses all M coefficients and the chi
    squared reference with M degrees of freedom applies directly.  With a
    selection the statistic keeps only the selected coefficients while the
    reference stays at M, which bounds the p-value from above because the
    trimmed statistic can never exceed the full one.
    """
    m = coeffs.config.size
    if selection is None:
        active = np.arange(m)
        adjusted = False
        k_star = m
    else:
        active = selection.active
        adjusted = True
        k_star = selection.k_star
    stat = float(coeffs.n * np.sum(coeffs.theta[active] ** 2))
    indices = coeffs.indices
    return DevianceReport(
        statistic=stat,
        df=m,
        p_value=float(chi2_sf(stat, m)),
        log10_p_value=chi2_log10sf(stat, m),
        adjusted=adjusted,
        k_star=int(k_star),
        m=m,
        active=tuple(indices[i] for i in active),
    )


def subset_index_mask(config, subset_positions) -> np.ndarray:
    """Boolean mask over the index enumeration for one coordinate subset.

    Keeps the multi-indices whose entries vanish outside the subset; their
    count is prod(m_d + 1) - 1 over the subset coordinates.
    """
    subset = set(int(d) for d in subset_positions)
    mask = np.empty(config.size, dtype=bool)
    for pos, k in enumerate(enumerate_K(config)):
        mask[pos] = all(j == 0 for d, j in enumerate(k) if d not in subset)
    return mask


def diagnose(
    coeffs: CoefficientSet,
    selection: SelectionResult,
    model: ModelSpec,
    subset,
) -> DiagnosticRow:
    """Selection-robust deviance test restricted to one coordinate subset.

    The subset must contain every coordinate its members condition on;
    otherwise the restricted transform does not factor the hypothesized
    sub-model and the restricted test is meaningless.
    """
    positions = model.resolve_subset(subset)
    missing = model.missing_parents(positions)
    if missing:
        names = ", ".join(model.names[d] for d in missing)
        raise MarginalityError(
            f"subset ({', '.join(model.names[d] for d in positions)}) is missing "
            f"conditioning parents: {names}",
            missing=missing,
        )
    mask = subset_index_mask(coeffs.config, positions)
    m_q = int(mask.sum())
    keep = mask.copy()
    sel_mask = np.zeros(coeffs.config.size, dtype=bool)
    sel_mask[selection.active] = True
    keep &= sel_mask
    stat = float(coeffs.n * np.sum(coeffs.theta[keep] ** 2))
    return DiagnosticRow(
        subset=positions,
        labels=tuple(model.names[d] for d in positions),
        m_q=m_q,
        statistic=stat,
        p_value=float(chi2_sf(stat, m_q)),
        log10_p_value=chi2_log10sf(stat, m_q),
    )


def diagnostic_table(
    coeffs: CoefficientSet,
    selection: SelectionResult,
    model: ModelSpec,
    subsets,
) -> list[DiagnosticRow]:
    """Diagnostic rows for several subsets, in the given order."""
    return [diagnose(coeffs, selection, model, subset) for subset in subsets]
