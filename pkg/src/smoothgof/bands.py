"""Confidence bands for the comparison density via its null random field.

Under the hypothesized model the standardized estimation error of the
comparison density converges to a smooth Gaussian field on the cube with
mean zero and unit variance, so a simultaneous band needs the tail of the
field's supremum.  Two routes are provided: a direct Monte Carlo of the sup
over a lattice, and the expected-Euler-characteristic approximation whose
two geometry constants are fitted by regression on simulated characteristic
curves and then plugged into the tail equation solved for the band level.

The regression uses the standard second-order kinematic term, which carries
a factor of the threshold; fitting both constants is then a well-posed
two-column least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisConfig, tensor_table
from .errors import DomainError, RankError
from .estimate import ComparisonDensity, eval_d
from .numeric import as_generator, find_root, std_normal_cdf

__all__ = [
    "FieldGrid",
    "LKCEstimate",
    "se0",
    "null_field_values",
    "mc_sup_quantile",
    "empirical_ec",
    "fit_ec_curve",
    "estimate_lkc",
    "solve_c_alpha",
    "band_grid",
]

_DEFAULT_THRESHOLDS = (0.5, 1.0, 1.5, 2.0)


def se0(cd: ComparisonDensity, u, n: int | None = None):
    """Null standard error of the comparison-density estimate at u.

    Under the hypothesized model the scores are orthonormal, so the variance
    at a point is the squared norm of the active basis vector over n.
    """
    n = int(n if n is not None else cd.coefficients.n)
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    table = tensor_table(cd.coefficients.config, u, cd.active_indices)
    vals = np.sqrt(np.sum(table ** 2, axis=1) / n)
    return float(vals[0]) if single else vals


def grid_axes(resolution, p: int):
    """Per-dimension lattice coordinates and the stacked point matrix."""
    if np.isscalar(resolution):
        resolution = (int(resolution),) * p
    resolution = tuple(int(r) for r in resolution)
    if len(resolution) != p:
        raise DomainError("resolution must be a scalar or one entry per dimension")
    if any(r < 2 for r in resolution):
        raise DomainError("grid needs at least two points per dimension")
    axes = [np.linspace(0.0, 1.0, r) for r in resolution]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in mesh], axis=1)
    return resolution, axes, points


def _standardized_table(config: BasisConfig, points: np.ndarray):
    table = tensor_table(config, points)
    norms = np.sqrt(np.sum(table ** 2, axis=1))
    # where every basis function vanishes the estimate is exactly one and
    # the standardized field is degenerate; an infinite norm pins it to zero
    norms = np.where(norms > 0, norms, np.inf)
    return table, norms


def null_field_values(
    config: BasisConfig, points: np.ndarray, b: int, seed=0
) -> np.ndarray:
    """b draws of the standardized null field at the given cube points.

    The asymptotic null coefficients are independent standard normals over
    sqrt(n), and the standardization cancels n, so the field is sampled
    directly from its limit.
    """
    rng = as_generator(seed)
    table, norms = _standardized_table(config, points)
    z = rng.standard_normal((int(b), config.size))
    return (z @ table.T) / norms


def mc_sup_quantile(
    config: BasisConfig,
    alpha: float,
    b: int,
    resolution=None,
    redo_selection: bool = False,
    criterion: str = "aic",
    n: int | None = None,
    seed=0,
) -> float:
    """Monte Carlo (1 - alpha/2) quantile of the null field's lattice sup.

    The plain route draws the limiting field directly.  With
    ``redo_selection`` each replicate fits a uniform sample of size n and
    reruns the coefficient selection before evaluating the field, so the
    quantile reflects the extra variability of data-driven trimming.  The
    standardization stays the full-basis null standard error in both
    routes: that is the field whose sup the tail equation approximates, and
    trimmed estimates standardized this way can only cross lower, which
    keeps the approximate band the conservative one.  Replicates whose
    selection keeps nothing contribute a sup of zero.
    """
    if b < 100:
        raise DomainError("at least 100 replicates are required")
    if not 0 < alpha < 1:
        raise DomainError("alpha must be in (0, 1)")
    p = config.dimension
    if p > 3:
        raise DomainError("lattice sup quantiles are limited to three dimensions")
    if resolution is None:
        resolution = 101 if p <= 2 else 51
    resolution, _, points = grid_axes(resolution, p)
    if min(resolution) < 21:
        raise DomainError("at least 21 lattice points per dimension are required")

    if not redo_selection:
        sups = np.empty(int(b))
        chunk = max(1, int(2e7 / max(len(points), 1)))
        rng = as_generator(seed)
        table, norms = _standardized_table(config, points)
        done = 0
        while done < b:
            take = min(chunk, b - done)
            z = rng.standard_normal((take, config.size))
            fields = (z @ table.T) / norms
            sups[done : done + take] = fields.max(axis=1)
            done += take
        return float(np.quantile(sups, 1.0 - alpha / 2.0))

    from .estimate import fit
    from .select import select

    if n is None:
        raise DomainError("redo_selection needs the sample size n")
    rng = as_generator(seed)
    table, norms = _standardized_table(config, points)
    sups = np.empty(int(b))
    for r in range(int(b)):
        u = rng.random((int(n), p))
        coeffs = fit(u, config, with_cov=False)
        sel = select(coeffs, criterion)
        act = sel.active
        if act.size == 0:
            sups[r] = 0.0
            continue
        num = math.sqrt(n) * (table[:, act] @ coeffs.theta[act])
        sups[r] = float(np.max(num / norms))
    return float(np.quantile(sups, 1.0 - alpha / 2.0))


def empirical_ec(field: np.ndarray, threshold: float) -> int:
    """Euler characteristic of the lattice excursion set {field >= t}.

    Counts vertices minus edges plus plaquettes of the thresholded cell
    complex on a rectangular 2-d lattice.
    """
    field = np.asarray(field)
    if field.ndim != 2:
        raise DomainError("the characteristic counter expects a 2-d lattice")
    exc = field >= threshold
    v = int(exc.sum())
    e_rows = int((exc[:, 1:] & exc[:, :-1]).sum())
    e_cols = int((exc[1:, :] & exc[:-1, :]).sum())
    f = int((exc[1:, 1:] & exc[1:, :-1] & exc[:-1, 1:] & exc[:-1, :-1]).sum())
    return v - e_rows - e_cols + f


@dataclass(frozen=True)
class LKCEstimate:
    """Fitted geometry constants of the expected-characteristic curve."""

    l1: float
    l2: float
    thresholds: tuple[float, ...]
    residual_norm: float
    replicates: int


def _ec_design(thresholds: np.ndarray) -> np.ndarray:
    e = np.exp(-thresholds ** 2 / 2.0)
    return np.column_stack(
        [e / math.pi, thresholds * e / (math.sqrt(2.0) * math.pi ** 1.5)]
    )


def _ec_tail(c: float, l1: float, l2: float) -> float:
    e = math.exp(-c * c / 2.0)
    return (
        float(1.0 - std_normal_cdf(c))
        + l1 * e / math.pi
        + l2 * c * e / (math.sqrt(2.0) * math.pi ** 1.5)
    )


def fit_ec_curve(thresholds, ec_means, replicates: int = 0) -> LKCEstimate:
    """Least-squares fit of the two geometry constants to a mean EC curve."""
    thresholds = np.asarray(thresholds, dtype=float)
    ec_means = np.asarray(ec_means, dtype=float)
    if thresholds.ndim != 1 or thresholds.shape != ec_means.shape:
        raise DomainError("thresholds and characteristic means must match")
    if len(np.unique(thresholds)) < 2:
        raise RankError("fitting two constants needs at least two distinct thresholds")
    target = ec_means - (1.0 - std_normal_cdf(thresholds))
    design = _ec_design(thresholds)
    sol, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = float(np.linalg.norm(design @ sol - target))
    return LKCEstimate(float(sol[0]), float(sol[1]), tuple(thresholds), resid, replicates)


def estimate_lkc(
    config: BasisConfig,
    b: int = 2000,
    thresholds=_DEFAULT_THRESHOLDS,
    seed=0,
    resolution: int = 101,
) -> LKCEstimate:
    """Fit the geometry constants from simulated null characteristic curves.

    Simulates b null fields on a 2-d lattice, averages the excursion-set
    Euler characteristic at each threshold, and regresses the average curve
    on the two kinematic terms.  Thresholds stay low, where characteristic
    counts are stable; the fitted curve is then extrapolated by the solver.
    """
    if config.dimension != 2:
        raise DomainError("characteristic-curve fitting is implemented for p = 2")
    if b < 500:
        raise DomainError("at least 500 replicates are required")
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(thresholds < 0.5) or np.any(thresholds > 2.5):
        raise DomainError("fitting thresholds must lie in [0.5, 2.5]")
    resolution, _, points = grid_axes(resolution, 2)
    table, norms = _standardized_table(config, points)
    rng = as_generator(seed)
    total = np.zeros(len(thresholds))
    chunk = max(1, int(2e7 / len(points)))
    done = 0
    while done < b:
        take = min(chunk, b - done)
        z = rng.standard_normal((take, config.size))
        fields = ((z @ table.T) / norms).reshape(take, *resolution)
        for i, t in enumerate(thresholds):
            exc = fields >= t
            v = exc.sum(axis=(1, 2))
            e1 = (exc[:, :, 1:] & exc[:, :, :-1]).sum(axis=(1, 2))
            e2 = (exc[:, 1:, :] & exc[:, :-1, :]).sum(axis=(1, 2))
            f = (
                exc[:, 1:, 1:] & exc[:, 1:, :-1] & exc[:, :-1, 1:] & exc[:, :-1, :-1]
            ).sum(axis=(1, 2))
            total[i] += float((v - e1 - e2 + f).sum())
        done += take
    return fit_ec_curve(thresholds, total / b, replicates=int(b))


def solve_c_alpha(lkc: LKCEstimate, alpha: float) -> float:
    """Band level: root of the fitted tail curve minus alpha/2 on [1, 10]."""
    if not 0 < alpha < 0.5:
        raise DomainError("alpha must be in (0, 0.5)")
    return find_root(
        lambda c: _ec_tail(c, lkc.l1, lkc.l2) - alpha / 2.0, 1.0, 10.0, tol=1e-8
    )


@dataclass(frozen=True)
class FieldGrid:
    """Lattice evaluation of the estimate with its band classification.

    ``classification`` is +1 where the estimate exceeds the upper band,
    -1 below the lower band and 0 inside.
    """

    resolution: tuple[int, ...]
    axes: tuple[np.ndarray, ...]
    points: np.ndarray
    d_hat: np.ndarray
    se0: np.ndarray
    classification: np.ndarray
    c: float


def band_grid(
    cd: ComparisonDensity, c: float, n: int | None = None, resolution=None
) -> FieldGrid:
    """Evaluate the estimate on a lattice and classify it against the band."""
    p = cd.coefficients.config.dimension
    if p > 3:
        raise DomainError("band grids are limited to three dimensions")
    if resolution is None:
        resolution = 101 if p <= 2 else 51
    resolution, axes, points = grid_axes(resolution, p)
    d_vals = eval_d(cd, points)
    se_vals = se0(cd, points, n)
    upper = d_vals > 1.0 + c * se_vals
    lower = d_vals < 1.0 - c * se_vals
    classification = np.where(upper, 1, np.where(lower, -1, 0)).astype(np.int8)
    return FieldGrid(
        resolution=resolution,
        axes=tuple(axes),
        points=points,
        d_hat=np.asarray(d_vals),
        se0=np.asarray(se_vals),
        classification=classification,
        c=float(c),
    )
