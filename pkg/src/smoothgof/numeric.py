"""Shared numerics: special functions, quadrature, root finding, RNG contract.

Everything downstream (basis evaluation, tests, Monte Carlo layers) builds on
the handful of primitives collected here.  The linear-domain special functions
delegate to scipy; the chi-squared log survival function is implemented
directly so that p-values far below the smallest normal double remain usable
in log10 form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy import optimize

from .errors import BracketError, DomainError

__all__ = [
    "QuadratureRule",
    "RngSeed",
    "as_generator",
    "std_normal_cdf",
    "std_normal_quantile",
    "chi2_sf",
    "chi2_logsf",
    "chi2_log10sf",
    "gauss_legendre",
    "product_rule",
    "find_root",
]

_MAX_QUAD_NODES = 512


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a quadrature rule on the unit interval.

    Weights sum to one and nodes are strictly increasing; an n-node rule
    integrates polynomials of degree up to 2n - 1 exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise DomainError("nodes and weights must be 1-d arrays of equal length")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("quadrature nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise DomainError("quadrature weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise DomainError("quadrature weights must sum to 1")

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True)
class RngSeed:
    """Address of a deterministic random stream.

    The same (seed, stream) pair always reproduces the same draw sequence,
    and distinct streams are statistically independent.  Monte Carlo loops
    give replicate r the stream ``base.child(r)`` so that results do not
    depend on execution order or worker count.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream < 0:
            raise DomainError("seed and stream must be nonnegative integers")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.stream]))

    def child(self, stream: int) -> "RngSeed":
        return RngSeed(self.seed, stream)


def as_generator(seed) -> np.random.Generator:
    """Normalize an int, RngSeed or Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RngSeed):
        return seed.generator()
    if isinstance(seed, (int, np.integer)):
        return RngSeed(int(seed)).generator()
    raise DomainError(f"cannot interpret {seed!r} as a random generator")


def std_normal_cdf(x):
    """Standard normal cdf, vectorized, absolute error below 1e-12."""
    return special.ndtr(x)


def std_normal_quantile(q):
    """Inverse of :func:`std_normal_cdf`."""
    return special.ndtri(q)


def _check_df(df: int) -> int:
    if df != int(df) or df < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df}")
    return int(df)


def chi2_sf(x, df: int):
    """Survival function of the chi-squared distribution.

    Computed as the regularized upper incomplete gamma function; accurate in
    relative terms well into the far tail.  Use :func:`chi2_logsf` when the
    result may underflow double precision.
    """
    df = _check_df(df)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("chi-squared statistic must be nonnegative")
    out = special.chdtrc(df, x)
    return float(out) if out.ndim == 0 else out


def _log_lower_reg_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) via its power series.

    Valid for x < a + 1 where the series converges quickly; returns P.
    """
    # P(a,x) = x^a e^-x / Gamma(a+1) * sum_k prod_{i<=k} x/(a+i)
    term = 1.0
    total = 1.0
    denom = a
    for _ in range(1000000):
        denom += 1.0
        term *= x / denom
        total += term
        if term < total * 1e-17:
            break
    log_p = a * math.log(x) - x - math.lgamma(a + 1.0) + math.log(total)
    return math.exp(log_p)


def _log_upper_reg_cf(a: float, x: float) -> float:
    """log of the regularized upper incomplete gamma Q(a, x), x >= a + 1.

    Lentz evaluation of the classical continued fraction; the dominant
    exponential prefactor stays in the log domain, so the result is finite
    even when Q itself underflows.
    """
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, 1000000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return -x + a * math.log(x) - math.lgamma(a) + math.log(h)


def chi2_logsf(x: float, df: int) -> float:
    """Natural log of :func:`chi2_sf`, stable arbitrarily far into the tail.

    The far tail is evaluated with a continued fraction whose exponential
    prefactor never leaves the log domain, so statistics whose p-values are
    smaller than ~1e-308 still report a finite log.
    """
    df = _check_df(df)
    x = float(x)
    if x < 0:
        raise DomainError("chi-squared statistic must be nonnegative")
    if x == 0.0:
        return 0.0
    a = df / 2.0
    half = x / 2.0
    if half < a + 1.0:
        p = _log_lower_reg_series(a, half)
        if p >= 1.0:
            return -math.inf
        return math.log1p(-p)
    return _log_upper_reg_cf(a, half)


def chi2_log10sf(x: float, df: int) -> float:
    """Base-10 log of the chi-squared survival function."""
    return chi2_logsf(x, df) / math.log(10.0)


def gauss_legendre(n: int) -> QuadratureRule:
    """Gauss-Legendre rule with n nodes, mapped from [-1, 1] to [0, 1]."""
    if n != int(n) or not 1 <= n <= _MAX_QUAD_NODES:
        raise DomainError(f"node count must be in [1, {_MAX_QUAD_NODES}], got {n}")
    nodes, weights = np.polynomial.legendre.leggauss(int(n))
    return QuadratureRule(0.5 * (nodes + 1.0), 0.5 * weights)


def product_rule(rule: QuadratureRule, p: int):
    """Tensor product of a 1-d rule over the p-cube.

    Returns (points, weights) with points of shape (n**p, p).  Intended for
    the low-dimensional quadrature oracles; the node count grows as n**p.
    """
    if p < 1:
        raise DomainError("dimension must be positive")
    grids = np.meshgrid(*([rule.nodes] * p), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    weights = rule.weights
    for _ in range(p - 1):
        weights = np.multiply.outer(weights, rule.weights)
    return points, weights.ravel()


def find_root(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Root of f on [lo, hi] by a guaranteed-bracketing hybrid method.

    Requires a sign change on the bracket (endpoints with f = 0 count).
    Raises :class:`BracketError` otherwise.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if not lo < hi:
        raise DomainError("bracket must satisfy lo < hi")
    f_lo = f(lo)
    f_hi = f(hi)
    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if f_lo * f_hi > 0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}")
    return float(optimize.brentq(f, lo, hi, xtol=tol))
