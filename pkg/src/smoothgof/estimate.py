"""Coefficient estimation and the comparison-density evaluators.

Fitting averages every tensor basis function over the cube-transformed
sample.  The averages are assembled by folding per-coordinate polynomial
tables into a running tensor product, which never materializes the full
n-by-M score matrix; that matrix is only formed when the sample covariance
of the scores is requested, and it is what selection, inference and the
band machinery consume downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .basis import BasisConfig, enumerate_K, legendre_table, tensor_table
from .errors import DomainError, MissingCovarianceError
from .model import ModelSpec, USample
from .numeric import QuadratureRule, gauss_legendre, product_rule

__all__ = [
    "CoefficientSet",
    "ComparisonDensity",
    "fit",
    "eval_d",
    "eval_f",
    "variance_d",
    "isb_oracle",
    "theta_by_quadrature",
]

# Above this many basis functions the score covariance (M x M) and the score
# matrix (n x M) stop being worth their memory; theta alone is enough for
# selection and the diagnostic statistics.
_AUTO_COV_LIMIT = 512


@dataclass(frozen=True)
class CoefficientSet:
    """Estimated expansion coefficients for one fitted sample.

    ``theta`` follows the lexicographic multi-index order of the basis
    configuration.  ``sigma``, when kept, is the sample covariance matrix of
    the basis scores divided by n, so it estimates Cov(theta_hat).
    """

    config: BasisConfig
    theta: np.ndarray
    n: int
    sigma: np.ndarray | None = None

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        if theta.shape != (self.config.size,):
            raise DomainError(
                f"theta has length {theta.shape}, basis needs {self.config.size}"
            )
        if self.n < 1:
            raise DomainError("sample size must be positive")
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            object.__setattr__(self, "sigma", sigma)
            m = self.config.size
            if sigma.shape != (m, m):
                raise DomainError("sigma must be M x M")
            if np.max(np.abs(sigma - sigma.T)) > 1e-8:
                raise DomainError("sigma must be symmetric")
            if np.min(np.linalg.eigvalsh(0.5 * (sigma + sigma.T))) < -1e-8:
                raise DomainError("sigma must be positive semidefinite")

    @property
    def indices(self) -> list[tuple[int, ...]]:
        return enumerate_K(self.config)

    def to_dict(self) -> dict:
        out = {
            "degrees": list(self.config.degrees),
            "index_order": [list(k) for k in self.indices],
            "theta": self.theta.tolist(),
            "n": int(self.n),
        }
        if self.sigma is not None:
            tri = self.sigma[np.tril_indices(self.config.size)]
            out["sigma_lower_triangle"] = tri.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "CoefficientSet":
        config = BasisConfig(tuple(doc["degrees"]))
        declared = [tuple(k) for k in doc.get("index_order", [])]
        if declared and declared != enumerate_K(config):
            raise DomainError("serialized index order does not match the enumeration")
        sigma = None
        if "sigma_lower_triangle" in doc:
            m = config.size
            sigma = np.zeros((m, m))
            sigma[np.tril_indices(m)] = doc["sigma_lower_triangle"]
            sigma = sigma + np.tril(sigma, -1).T
        return cls(config, np.asarray(doc["theta"], dtype=float), int(doc["n"]), sigma)


def _as_rows(u_sample) -> np.ndarray:
    if isinstance(u_sample, USample):
        rows = u_sample.rows
    else:
        rows = np.asarray(u_sample, dtype=float)
        if rows.ndim == 1:
            rows = rows[None, :]
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise DomainError("fit needs a nonempty 2-d sample")
    if np.any(rows < 0) or np.any(rows > 1):
        raise DomainError("fit expects cube-transformed values in [0, 1]")
    return rows


def _coordinate_tables(rows: np.ndarray, config: BasisConfig) -> list[np.ndarray]:
    return [legendre_table(rows[:, d], m) for d, m in enumerate(config.degrees)]


def _fold_theta(tables: list[np.ndarray]) -> np.ndarray:
    """Mean tensor product of the per-coordinate tables, flattened.

    Folds coordinates left to right and contracts the sample axis with the
    final coordinate, so the peak intermediate is n x (M+1)/(m_p+1) instead
    of n x (M+1).
    """
    n = tables[0].shape[0]
    acc = tables[0]
    for t in tables[1:-1]:
        acc = (acc[:, :, None] * t[:, None, :]).reshape(n, -1)
    if len(tables) == 1:
        return acc.mean(axis=0)
    return (acc.T @ tables[-1]).ravel() / n


def fit(u_sample, config: BasisConfig, with_cov: bool | None = None) -> CoefficientSet:
    """Average every basis function over the sample.

    ``with_cov`` keeps the score covariance; the default keeps it only while
    the basis is small enough for the M x M matrix to be cheap.
    """
    rows = _as_rows(u_sample)
    if rows.shape[1] != config.dimension:
        raise DomainError("sample and basis configuration disagree on dimension")
    tables = _coordinate_tables(rows, config)
    flat = _fold_theta(tables)
    theta = flat[1:]  # drop the constant function's average (always 1)
    if with_cov is None:
        with_cov = config.size <= _AUTO_COV_LIMIT and rows.shape[0] >= 2
    sigma = None
    if with_cov:
        if rows.shape[0] < 2:
            raise DomainError("covariance needs at least two observations")
        scores = tensor_table(config, rows)
        sigma = np.cov(scores, rowvar=False, ddof=1) / rows.shape[0]
        sigma = np.atleast_2d(sigma)
    return CoefficientSet(config, theta, rows.shape[0], sigma)


@dataclass(frozen=True)
class ComparisonDensity:
    """A truncated expansion 1 + sum of theta_k T_k over an active index set.

    ``active`` holds positions into the coefficient order; None means all.
    The estimate integrates to one over the cube by construction and is not
    constrained to stay nonnegative.
    """

    coefficients: CoefficientSet
    active: np.ndarray | None = None

    def __post_init__(self):
        if self.active is not None:
            active = np.asarray(self.active, dtype=int)
            object.__setattr__(self, "active", active)
            m = self.coefficients.config.size
            if active.size and (active.min() < 0 or active.max() >= m):
                raise DomainError("active positions out of range")
            if len(np.unique(active)) != len(active):
                raise DomainError("active positions must be unique")

    @property
    def active_positions(self) -> np.ndarray:
        if self.active is None:
            return np.arange(self.coefficients.config.size)
        return self.active

    @property
    def active_indices(self) -> list[tuple[int, ...]]:
        indices = self.coefficients.indices
        return [indices[i] for i in self.active_positions]


def _active_table(cd: ComparisonDensity, u) -> np.ndarray:
    return tensor_table(cd.coefficients.config, u, cd.active_indices)


def eval_d(cd: ComparisonDensity, u):
    """Comparison-density value(s) at cube point(s) u."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    table = _active_table(cd, u)
    vals = 1.0 + table @ cd.coefficients.theta[cd.active_positions]
    return float(vals[0]) if single else vals


def eval_f(cd: ComparisonDensity, model: ModelSpec, x):
    """Corrected density: hypothesized density times the comparison density."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    g = np.exp(model.logpdf(pts))
    vals = g * eval_d(cd, model.rosenblatt(pts))
    return float(vals[0]) if single else vals


def variance_d(cd: ComparisonDensity, u, under_null: bool = True):
    """Variance of the comparison-density estimator at u.

    Under the null the score covariance is the identity over n, so the
    variance is the squared norm of the active basis vector over n; otherwise
    the fitted sample covariance is used and must have been kept by the fit.
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    table = _active_table(cd, u)
    if under_null:
        vals = np.sum(table ** 2, axis=1) / cd.coefficients.n
    else:
        if cd.coefficients.sigma is None:
            raise MissingCovarianceError(
                "fit was run without the score covariance; refit with with_cov=True"
            )
        pos = cd.active_positions
        sub = cd.coefficients.sigma[np.ix_(pos, pos)]
        vals = np.einsum("ni,ij,nj->n", table, sub, table)
    return float(vals[0]) if single else vals


def theta_by_quadrature(
    d_values_at, config: BasisConfig, rule: QuadratureRule | None = None
) -> np.ndarray:
    """Population coefficients of a known comparison density, by quadrature.

    ``d_values_at`` maps an (npts, p) array of cube points to density values.
    Used by the simulation oracles where the truth is known explicitly.
    """
    if rule is None:
        rule = gauss_legendre(64)
    pts, w = product_rule(rule, config.dimension)
    table = tensor_table(config, pts)
    d_vals = np.asarray(d_values_at(pts), dtype=float)
    return table.T @ (w * d_vals)


def isb_oracle(
    truth,
    null_model: ModelSpec,
    config: BasisConfig,
    rule: QuadratureRule | None = None,
    form: str = "parseval",
) -> float:
    """Integrated squared bias of the truncated estimator, by quadrature.

    ``truth`` is either a density model (anything with a ``pdf`` method) or a
    plain callable returning density values at points of the data domain.
    The squared distance between the comparison density and one is reduced by
    the energy its truncation captures; with ``form="parseval"`` that energy
    is the summed squared coefficients, while ``form="linear"`` sums the raw
    coefficients instead (the two coincide at zero mismodeling but the linear
    form is not an L2 identity; it is kept for comparison only).
    """
    if config.dimension > 3:
        raise DomainError("the quadrature oracle is limited to three dimensions")
    if form not in ("parseval", "linear"):
        raise DomainError("form must be 'parseval' or 'linear'")
    if rule is None:
        rule = gauss_legendre(64)
    pdf = truth.pdf if hasattr(truth, "pdf") else truth

    pts, w = product_rule(rule, config.dimension)
    x = null_model.inverse_rosenblatt(np.clip(pts, 1e-12, 1 - 1e-12))
    g = np.exp(null_model.logpdf(x))
    f = np.asarray(pdf(x), dtype=float)
    if np.any((g <= 0) & (f > 0)):
        raise DomainError("truth puts mass where the hypothesized density vanishes")
    d = f / g
    distance2 = float(np.dot(w, (d - 1.0) ** 2))
    table = tensor_table(config, pts)
    theta = table.T @ (w * d)
    captured = float(np.sum(theta ** 2)) if form == "parseval" else float(np.sum(theta))
    return distance2 - captured
