"""Orthonormal score functions on the unit interval and their tensor products.

Continuous coordinates use normalized shifted Legendre polynomials; discrete
coordinates use the polynomial score functions built from the standardized
mid-distribution, which coincide with the Legendre system in the continuous
limit.  Tensor products over the unit cube are addressed by multi-indices,
p-tuples (j_1, ..., j_p) with j_d bounded by per-coordinate degrees.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RankError

__all__ = [
    "MAX_DEGREE",
    "BasisConfig",
    "DiscreteMarginal",
    "legendre_table",
    "legendre_eval",
    "tensor_eval",
    "tensor_table",
    "enumerate_K",
    "lp_discrete_basis",
]

# The three-term recurrence and double-precision quadrature both degrade past
# this degree; applications in scope stay at single-digit degrees.
MAX_DEGREE = 32


@dataclass(frozen=True)
class BasisConfig:
    """Per-coordinate truncation degrees (m_1, ..., m_p) of the tensor basis.

    The active index set excludes the all-zero tuple, so its cardinality is
    M = prod(m_d + 1) - 1.
    """

    degrees: tuple[int, ...]

    def __post_init__(self):
        degrees = tuple(int(m) for m in self.degrees)
        object.__setattr__(self, "degrees", degrees)
        if len(degrees) == 0:
            raise DomainError("at least one coordinate is required")
        for m in degrees:
            if not 1 <= m <= MAX_DEGREE:
                raise DomainError(f"degrees must be in [1, {MAX_DEGREE}], got {m}")

    @property
    def dimension(self) -> int:
        return len(self.degrees)

    @property
    def size(self) -> int:
        """Number of basis functions excluding the constant, M."""
        out = 1
        for m in self.degrees:
            out *= m + 1
        return out - 1


def enumerate_K(config: BasisConfig) -> list[tuple[int, ...]]:
    """All multi-indices in lexicographic order, the all-zero tuple excluded.

    This ordering is the package-wide index contract: coefficient vectors,
    selection results and diagnostic masks all refer to positions in this
    list.
    """
    ranges = [range(m + 1) for m in config.degrees]
    out = list(itertools.product(*ranges))[1:]
    return out


def _check_unit(u: np.ndarray):
    if np.any(u < 0) or np.any(u > 1):
        raise DomainError("basis arguments must lie in [0, 1]")


def legendre_table(u, max_degree: int) -> np.ndarray:
    """Normalized shifted Legendre values T_0..T_max at each point of u.

    Returns an array of shape u.shape + (max_degree + 1,).  Uses the stable
    three-term recurrence on [-1, 1] followed by the sqrt(2j + 1)
    normalization that makes each T_j have unit norm on [0, 1].
    """
    if not 0 <= max_degree <= MAX_DEGREE:
        raise DomainError(f"degree must be in [0, {MAX_DEGREE}], got {max_degree}")
    u = np.asarray(u, dtype=float)
    _check_unit(u)
    t = 2.0 * u - 1.0
    table = np.empty(u.shape + (max_degree + 1,))
    table[..., 0] = 1.0
    if max_degree >= 1:
        table[..., 1] = t
    for j in range(1, max_degree):
        table[..., j + 1] = ((2 * j + 1) * t * table[..., j] - j * table[..., j - 1]) / (j + 1)
    table *= np.sqrt(2.0 * np.arange(max_degree + 1) + 1.0)
    return table


def legendre_eval(j: int, u):
    """Value of the j-th normalized shifted Legendre polynomial at u in [0, 1]."""
    if j < 0:
        raise DomainError("degree must be nonnegative")
    out = legendre_table(u, j)[..., j]
    return float(out) if out.ndim == 0 else out


def tensor_eval(k: tuple[int, ...], u):
    """Product basis function T_k(u) = prod_d T_{k_d}(u_d).

    u is a single point of length p or an (n, p) array of points.
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    pts = u[None, :] if single else u
    if pts.shape[1] != len(k):
        raise DomainError(f"index has {len(k)} coordinates but points have {pts.shape[1]}")
    out = np.ones(pts.shape[0])
    for d, j in enumerate(k):
        out *= legendre_eval(int(j), pts[:, d])
    return float(out[0]) if single else out


def tensor_table(config: BasisConfig, u, indices=None) -> np.ndarray:
    """Matrix of tensor basis values, one row per point, one column per index.

    ``indices`` defaults to the full enumeration of the index set.  Columns
    follow the given index order.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[None, :]
    if u.shape[1] != config.dimension:
        raise DomainError("points and basis configuration disagree on dimension")
    if indices is None:
        indices = enumerate_K(config)
    per_coord = [legendre_table(u[:, d], m) for d, m in enumerate(config.degrees)]
    out = np.empty((u.shape[0], len(indices)))
    for col, k in enumerate(indices):
        acc = per_coord[0][:, k[0]].copy()
        for d in range(1, len(k)):
            acc *= per_coord[d][:, k[d]]
        out[:, col] = acc
    return out


@dataclass(frozen=True)
class DiscreteMarginal:
    """A finite discrete law given by its support points and probabilities."""

    support: np.ndarray
    pmf: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        pmf = np.asarray(self.pmf, dtype=float)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "pmf", pmf)
        if support.ndim != 1 or support.shape != pmf.shape:
            raise DomainError("support and pmf must be 1-d arrays of equal length")
        if np.any(np.diff(support) <= 0):
            raise DomainError("support points must be strictly increasing")
        if np.any(pmf <= 0):
            raise DomainError("probabilities must be positive")
        if abs(pmf.sum() - 1.0) > 1e-12:
            raise DomainError("probabilities must sum to 1")

    @property
    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    @property
    def mid_cdf(self) -> np.ndarray:
        """Mid-distribution values G(x) - p(x)/2 at the support points."""
        return self.cdf - 0.5 * self.pmf


def lp_discrete_basis(marginal: DiscreteMarginal, max_degree: int) -> np.ndarray:
    """Orthonormal polynomial score functions of a finite discrete law.

    Returns a table of shape (len(support), max_degree + 1) whose column j
    holds T_j evaluated on the support.  T_0 is constant one, T_1 is the
    standardized mid-distribution, and higher columns come from
    orthonormalizing powers of T_1 under the law itself, so that
    sum_x p(x) T_j(x) T_k(x) = delta_jk.
    """
    s = len(marginal.support)
    if s < 2:
        raise DomainError("a discrete basis needs at least two support points")
    if max_degree < 1:
        raise DomainError("max_degree must be at least 1")
    if max_degree >= s:
        raise RankError(
            f"degree {max_degree} needs more than the {s} distinct support points available"
        )
    p = marginal.pmf
    mid = marginal.mid_cdf
    var = (1.0 - np.sum(p ** 3)) / 12.0
    t1 = (mid - 0.5) / np.sqrt(var)

    table = np.empty((s, max_degree + 1))
    table[:, 0] = 1.0
    table[:, 1] = t1
    for j in range(2, max_degree + 1):
        v = t1 ** j
        # two Gram-Schmidt passes; a single pass loses orthogonality on
        # strongly skewed laws
        for _ in range(2):
            for k in range(j):
                v = v - np.sum(p * v * table[:, k]) * table[:, k]
        norm2 = np.sum(p * v * v)
        if norm2 <= 1e-24:
            raise RankError(f"powers of the score function are dependent at degree {j}")
        table[:, j] = v / np.sqrt(norm2)
    return table
