"""Hypothesized models as ordered chains of conditional distributions.

A model lists its coordinates in a fixed order; the law of each coordinate
may condition on earlier coordinates (its parents).  Applying the conditional
cdfs sequentially maps a data point into the unit cube, and the map is
uniform on the cube exactly when the data follow the model.  The sequential
quantile map inverts it, and sampling composes that inverse with uniform
draws.

Parameters of a law are either constants or small declared forms of the
parent values (affine, exponentiated affine with optional squared terms,
reciprocal affine), which keeps model files serializable.  A tabulated-cdf
law is available as an escape hatch for marginals that only exist through
quadrature.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, SupportError
from .numeric import as_generator

__all__ = [
    "Const",
    "Affine",
    "ExpAffine",
    "InvAffine",
    "ConditionalLaw",
    "Uniform",
    "Normal",
    "TruncatedNormalSlice",
    "Exponential",
    "Laplace",
    "StudentT",
    "Cauchy",
    "DiscretePmf",
    "NumericGrid",
    "Coordinate",
    "ModelSpec",
    "USample",
    "model_from_json",
    "model_to_json",
]

_LOG_2PI = math.log(2.0 * math.pi)


# --------------------------------------------------------------------------
# declared parameter forms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return np.full(X.shape[0], float(self.value))



@dataclass(frozen=True)
class Affine:
    """intercept + sum_d weights[d] * x_d over parent columns d."""

    intercept: float
    weights: dict[int, float]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        out = np.full(X.shape[0], float(self.intercept))
        for d, w in self.weights.items():
            out += w * X[:, d]
        return out



@dataclass(frozen=True)
class ExpAffine:
    """exp of an affine form, optionally with squared-parent terms."""

    intercept: float
    weights: dict[int, float]
    quad_weights: dict[int, float] = field(default_factory=dict)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        out = np.full(X.shape[0], float(self.intercept))
        for d, w in self.weights.items():
            out += w * X[:, d]
        for d, w in self.quad_weights.items():
            out += w * X[:, d] ** 2
        return np.exp(out)



@dataclass(frozen=True)
class InvAffine:
    """Reciprocal of an affine form; used for rates that scale with a parent."""

    intercept: float
    weights: dict[int, float]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        denom = np.full(X.shape[0], float(self.intercept))
        for d, w in self.weights.items():
            denom += w * X[:, d]
        if np.any(denom == 0):
            raise DomainError("reciprocal-affine parameter hit a zero denominator")
        return 1.0 / denom



def _as_param(value):
    if callable(value):
        return value
    return Const(float(value))


def _const_value(value) -> float:
    if isinstance(value, Const):
        return float(value.value)
    if callable(value):
        raise DomainError("this parameter must be a constant")
    return float(value)


# --------------------------------------------------------------------------
# conditional laws
# --------------------------------------------------------------------------


class ConditionalLaw:
    """Base class: a univariate law whose parameters may depend on parents.

    Subclasses implement ``cdf``, ``quantile`` and ``logpdf``; all three take
    the coordinate values and the full matrix of earlier coordinates.  The
    ``parents`` tuple lists the column indices the law reads.
    """

    family = "abstract"

    def __init__(self, parents=()):
        self.parents = tuple(int(d) for d in parents)

    def cdf(self, x: np.ndarray, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def quantile(self, u: np.ndarray, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def logpdf(self, x: np.ndarray, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support_bounds(self, X: np.ndarray):
        """Per-row (lo, hi) support bounds; infinite where unbounded."""
        n = X.shape[0]
        return np.full(n, -np.inf), np.full(n, np.inf)

    def params_to_json(self):
        raise NotImplementedError

    @staticmethod
    def _open_unit(u: np.ndarray, where: str):
        if np.any(u <= 0.0) or np.any(u >= 1.0):
            raise DomainError(
                f"{where}: quantile of an unbounded law needs u strictly inside (0, 1)"
            )


class Uniform(ConditionalLaw):
    family = "uniform"

    def __init__(self, lo, hi, parents=()):
        super().__init__(parents)
        self.lo = _as_param(lo)
        self.hi = _as_param(hi)

    def _bounds(self, X):
        lo = self.lo(X)
        hi = self.hi(X)
        if np.any(hi <= lo):
            raise DomainError("uniform law needs hi > lo at every point")
        return lo, hi

    def cdf(self, x, X):
        lo, hi = self._bounds(X)
        return (x - lo) / (hi - lo)

    def quantile(self, u, X):
        lo, hi = self._bounds(X)
        return lo + u * (hi - lo)

    def logpdf(self, x, X):
        lo, hi = self._bounds(X)
        return -np.log(hi - lo)

    def support_bounds(self, X):
        return self._bounds(X)

    def params_to_json(self):
        return {"lo": self.lo, "hi": self.hi}


class Normal(ConditionalLaw):
    family = "normal"

    def __init__(self, mean, sd, parents=()):
        super().__init__(parents)
        self.mean = _as_param(mean)
        self.sd = _as_param(sd)

    def _params(self, X):
        m = self.mean(X)
        s = self.sd(X)
        if np.any(s <= 0):
            raise DomainError("normal law needs a positive standard deviation")
        return m, s

    def cdf(self, x, X):
        m, s = self._params(X)
        return special.ndtr((x - m) / s)

    def quantile(self, u, X):
        self._open_unit(u, self.family)
        m, s = self._params(X)
        return m + s * special.ndtri(u)

    def logpdf(self, x, X):
        m, s = self._params(X)
        z = (x - m) / s
        return -0.5 * z * z - np.log(s) - 0.5 * _LOG_2PI

    def params_to_json(self):
        return {"mean": self.mean, "sd": self.sd}


class TruncatedNormalSlice(ConditionalLaw):
    """A normal restricted to a fixed interval and renormalized.

    The location may depend on parents; the scale and the interval are
    constants, which is the shape a rectangle-truncated Gaussian chain
    produces for its conditional coordinate.
    """

    family = "truncated-normal-slice"

    def __init__(self, mean, sd, lo, hi, parents=()):
        super().__init__(parents)
        self.mean = _as_param(mean)
        self.sd = _as_param(sd)
        self.lo = _const_value(lo)
        self.hi = _const_value(hi)
        if not self.lo < self.hi:
            raise DomainError("truncation interval must satisfy lo < hi")

    def _pieces(self, X):
        m = self.mean(X)
        s = self.sd(X)
        if np.any(s <= 0):
            raise DomainError("truncated normal needs a positive standard deviation")
        z_lo = special.ndtr((self.lo - m) / s)
        z_hi = special.ndtr((self.hi - m) / s)
        mass = z_hi - z_lo
        if np.any(mass <= 0):
            raise DomainError("truncation interval carries no mass at some parent values")
        return m, s, z_lo, mass

    def cdf(self, x, X):
        m, s, z_lo, mass = self._pieces(X)
        return (special.ndtr((x - m) / s) - z_lo) / mass

    def quantile(self, u, X):
        m, s, z_lo, mass = self._pieces(X)
        return m + s * special.ndtri(z_lo + u * mass)

    def logpdf(self, x, X):
        m, s, z_lo, mass = self._pieces(X)
        z = (x - m) / s
        return -0.5 * z * z - 0.5 * _LOG_2PI - np.log(s) - np.log(mass)

    def support_bounds(self, X):
        n = X.shape[0]
        return np.full(n, self.lo), np.full(n, self.hi)

    def params_to_json(self):
        return {"mean": self.mean, "sd": self.sd, "lo": Const(self.lo), "hi": Const(self.hi)}


class Exponential(ConditionalLaw):
    family = "exponential"

    def __init__(self, rate, parents=()):
        super().__init__(parents)
        self.rate = _as_param(rate)

    def _rate(self, X):
        r = self.rate(X)
        if np.any(r <= 0):
            raise DomainError("exponential law needs a positive rate")
        return r

    def cdf(self, x, X):
        return -np.expm1(-self._rate(X) * x)

    def quantile(self, u, X):
        if np.any(u >= 1.0) or np.any(u < 0.0):
            raise DomainError("exponential quantile needs u in [0, 1)")
        return -np.log1p(-u) / self._rate(X)

    def logpdf(self, x, X):
        r = self._rate(X)
        return np.log(r) - r * x

    def support_bounds(self, X):
        n = X.shape[0]
        return np.zeros(n), np.full(n, np.inf)

    def params_to_json(self):
        return {"rate": self.rate}


class Laplace(ConditionalLaw):
    family = "laplace"

    def __init__(self, location, scale, parents=()):
        super().__init__(parents)
        self.location = _as_param(location)
        self.scale = _as_param(scale)

    def _params(self, X):
        loc = self.location(X)
        s = self.scale(X)
        if np.any(s <= 0):
            raise DomainError("laplace law needs a positive scale")
        return loc, s

    def cdf(self, x, X):
        loc, s = self._params(X)
        z = (x - loc) / s
        # evaluate each branch only where it applies; exp overflows otherwise
        out = np.empty_like(z)
        neg = z < 0
        out[neg] = 0.5 * np.exp(z[neg])
        out[~neg] = 1.0 - 0.5 * np.exp(-z[~neg])
        return out

    def quantile(self, u, X):
        self._open_unit(u, self.family)
        loc, s = self._params(X)
        z = np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))
        return loc + s * z

    def logpdf(self, x, X):
        loc, s = self._params(X)
        return -np.abs(x - loc) / s - np.log(2.0 * s)

    def params_to_json(self):
        return {"location": self.location, "scale": self.scale}


class StudentT(ConditionalLaw):
    family = "student-t"

    def __init__(self, df, parents=()):
        super().__init__(parents)
        self.df = _const_value(df)
        if self.df <= 0:
            raise DomainError("student-t law needs positive degrees of freedom")

    def cdf(self, x, X):
        return special.stdtr(self.df, np.asarray(x, dtype=float))

    def quantile(self, u, X):
        self._open_unit(u, self.family)
        return special.stdtrit(self.df, np.asarray(u, dtype=float))

    def logpdf(self, x, X):
        v = self.df
        c = math.lgamma((v + 1) / 2) - math.lgamma(v / 2) - 0.5 * math.log(v * math.pi)
        return c - 0.5 * (v + 1) * np.log1p(np.asarray(x, dtype=float) ** 2 / v)

    def params_to_json(self):
        return {"df": Const(self.df)}


class Cauchy(ConditionalLaw):
    family = "cauchy"

    def __init__(self, location, scale, parents=()):
        super().__init__(parents)
        self.location = _as_param(location)
        self.scale = _as_param(scale)

    def _params(self, X):
        loc = self.location(X)
        s = self.scale(X)
        if np.any(s <= 0):
            raise DomainError("cauchy law needs a positive scale")
        return loc, s

    def cdf(self, x, X):
        loc, s = self._params(X)
        return 0.5 + np.arctan((x - loc) / s) / math.pi

    def quantile(self, u, X):
        self._open_unit(u, self.family)
        loc, s = self._params(X)
        return loc + s * np.tan(math.pi * (u - 0.5))

    def logpdf(self, x, X):
        loc, s = self._params(X)
        z = (x - loc) / s
        return -np.log(math.pi * s * (1.0 + z * z))

    def params_to_json(self):
        return {"location": self.location, "scale": self.scale}


class DiscretePmf(ConditionalLaw):
    """A finite discrete law; the cube coordinate is the cdf at the atom."""

    family = "discrete-pmf"

    def __init__(self, support, pmf, parents=()):
        super().__init__(parents)
        self.support = np.asarray(support, dtype=float)
        self.pmf = np.asarray(pmf, dtype=float)
        if self.support.ndim != 1 or self.support.shape != self.pmf.shape:
            raise DomainError("support and pmf must be 1-d arrays of equal length")
        if np.any(np.diff(self.support) <= 0):
            raise DomainError("support points must be strictly increasing")
        if np.any(self.pmf <= 0) or abs(self.pmf.sum() - 1.0) > 1e-12:
            raise DomainError("pmf entries must be positive and sum to 1")
        self._cdf = np.cumsum(self.pmf)

    def _atom_index(self, x):
        pos = np.searchsorted(self.support, x)
        hi = np.clip(pos, 0, len(self.support) - 1)
        lo = np.clip(pos - 1, 0, len(self.support) - 1)
        idx = np.where(
            np.abs(x - self.support[hi]) <= np.abs(x - self.support[lo]), hi, lo
        )
        if not np.all(np.abs(x - self.support[idx]) <= 1e-9):
            raise DomainError("discrete law evaluated off its support")
        return idx

    def cdf(self, x, X):
        return self._cdf[self._atom_index(np.asarray(x, dtype=float))]

    def quantile(self, u, X):
        idx = np.searchsorted(self._cdf, np.asarray(u, dtype=float) - 1e-15)
        idx = np.clip(idx, 0, len(self.support) - 1)
        return self.support[idx]

    def logpdf(self, x, X):
        return np.log(self.pmf[self._atom_index(np.asarray(x, dtype=float))])

    def support_bounds(self, X):
        n = X.shape[0]
        return np.full(n, self.support[0]), np.full(n, self.support[-1])

    def params_to_json(self):
        return {"support": self.support.tolist(), "pmf": self.pmf.tolist()}


class NumericGrid(ConditionalLaw):
    """Tabulated cdf with a monotone cubic interpolant between knots.

    The tabulation is the model: the density is the interpolant's
    derivative and quantiles invert the interpolant numerically, so
    cdf/quantile round trips are exact to root-finding tolerance.  Knot
    slopes default to shape-preserving estimates; pass the density values
    when they are known to get the accuracy of the tabulation itself.
    """

    family = "numeric-grid"

    def __init__(self, x, cdf, pdf=None, parents=()):
        super().__init__(parents)
        self.x = np.asarray(x, dtype=float)
        self.c = np.asarray(cdf, dtype=float)
        if self.x.ndim != 1 or len(self.x) < 4 or self.x.shape != self.c.shape:
            raise DomainError("a grid law needs matching 1-d arrays with >= 4 knots")
        if np.any(np.diff(self.x) <= 0) or np.any(np.diff(self.c) < 0):
            raise DomainError("grid knots must increase and cdf values must be nondecreasing")
        if abs(self.c[0]) > 1e-12 or abs(self.c[-1] - 1.0) > 1e-12:
            raise DomainError("grid cdf must run from 0 to 1")
        if pdf is not None:
            self.d = np.asarray(pdf, dtype=float)
            if self.d.shape != self.x.shape or np.any(self.d < 0):
                raise DomainError("grid pdf values must be nonnegative and match the knots")
            self._pdf_given = True
        else:
            from scipy.interpolate import PchipInterpolator

            self.d = PchipInterpolator(self.x, self.c).derivative()(self.x)
            self._pdf_given = False

    def _hermite(self, x, derivative=False):
        k = np.clip(np.searchsorted(self.x, x, side="right") - 1, 0, len(self.x) - 2)
        h = self.x[k + 1] - self.x[k]
        s = (x - self.x[k]) / h
        c0, c1 = self.c[k], self.c[k + 1]
        d0, d1 = self.d[k] * h, self.d[k + 1] * h
        if derivative:
            v = (
                c0 * (6 * s * s - 6 * s)
                + c1 * (6 * s - 6 * s * s)
                + d0 * (3 * s * s - 4 * s + 1)
                + d1 * (3 * s * s - 2 * s)
            )
            return v / h
        return (
            c0 * (2 * s ** 3 - 3 * s * s + 1)
            + c1 * (3 * s * s - 2 * s ** 3)
            + d0 * (s ** 3 - 2 * s * s + s)
            + d1 * (s ** 3 - s * s)
        )

    def cdf(self, x, X):
        return np.clip(self._hermite(np.asarray(x, dtype=float)), 0.0, 1.0)

    def quantile(self, u, X):
        u = np.asarray(u, dtype=float)
        lo = np.full(u.shape, self.x[0])
        hi = np.full(u.shape, self.x[-1])
        # knot bracket first, then bisection inside a single panel
        k = np.clip(np.searchsorted(self.c, u) - 1, 0, len(self.x) - 2)
        lo = self.x[k]
        hi = self.x[k + 1]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = self._hermite(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def logpdf(self, x, X):
        dens = self._hermite(np.asarray(x, dtype=float), derivative=True)
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(dens, 0.0))

    def support_bounds(self, X):
        n = X.shape[0]
        return np.full(n, self.x[0]), np.full(n, self.x[-1])

    def params_to_json(self):
        out = {"x": self.x.tolist(), "cdf": self.c.tolist()}
        if self._pdf_given:
            out["pdf"] = self.d.tolist()
        return out


# --------------------------------------------------------------------------
# the model chain
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Coordinate:
    name: str
    law: ConditionalLaw


@dataclass(frozen=True)
class USample:
    """Cube-transformed observations plus the fingerprint of their model."""

    rows: np.ndarray
    fingerprint: str | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise DomainError("a u-sample needs at least one row")
        if np.any(rows < 0) or np.any(rows > 1):
            raise DomainError("u-sample entries must lie in [0, 1]")


class ModelSpec:
    """An ordered chain of conditional laws defining a joint distribution.

    The coordinate order is the transform order; no reordering happens
    behind the caller's back.
    """

    def __init__(self, coordinates):
        coords = []
        for item in coordinates:
            if isinstance(item, Coordinate):
                coords.append(item)
            else:
                name, law = item
                coords.append(Coordinate(str(name), law))
        self.coordinates = tuple(coords)
        names = [c.name for c in self.coordinates]
        if len(set(names)) != len(names):
            raise DomainError("coordinate names must be unique")
        for d, coord in enumerate(self.coordinates):
            for parent in coord.law.parents:
                if not 0 <= parent < d:
                    raise DomainError(
                        f"coordinate {coord.name!r} conditions on {parent}, "
                        f"which is not an earlier coordinate"
                    )

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.coordinates)

    def _as_matrix(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[None, :] if single else x
        if X.ndim != 2 or X.shape[1] != self.dimension:
            raise DomainError(
                f"expected points of dimension {self.dimension}, got shape {x.shape}"
            )
        return X, single

    def _check_support(self, X: np.ndarray):
        for d, coord in enumerate(self.coordinates):
            lo, hi = coord.law.support_bounds(X)
            bad = (X[:, d] < lo) | (X[:, d] > hi) | ~np.isfinite(X[:, d])
            if np.any(bad):
                row = int(np.argmax(bad))
                raise SupportError(
                    f"coordinate {coord.name!r}: value {X[row, d]} at row {row} "
                    f"is outside the support [{lo[row]}, {hi[row]}]",
                    coordinate=coord.name,
                    row=row,
                )

    def rosenblatt(self, x, validate: bool = True) -> np.ndarray:
        """Sequential conditional-cdf transform into the unit cube."""
        X, single = self._as_matrix(x)
        if validate:
            self._check_support(X)
        U = np.empty_like(X)
        for d, coord in enumerate(self.coordinates):
            U[:, d] = coord.law.cdf(X[:, d], X)
        U = np.clip(U, 0.0, 1.0)
        return U[0] if single else U

    def transform_sample(self, x) -> USample:
        return USample(np.atleast_2d(self.rosenblatt(x)), self.fingerprint())

    def inverse_rosenblatt(self, u) -> np.ndarray:
        """Sequential quantile transform; inverse of :meth:`rosenblatt`."""
        U, single = self._as_matrix(u)
        if np.any(U < 0) or np.any(U > 1):
            raise DomainError("cube points must lie in [0, 1]^p")
        X = np.empty_like(U)
        for d, coord in enumerate(self.coordinates):
            X[:, d] = coord.law.quantile(U[:, d], X)
        return X[0] if single else X

    def sample(self, n: int, seed) -> np.ndarray:
        """n independent draws, by inverse transform of uniform cube points."""
        if n < 1:
            raise DomainError("sample size must be positive")
        rng = as_generator(seed)
        u = rng.random((int(n), self.dimension))
        # a draw of exactly 0.0 (2^-53 chance per entry) would send unbounded
        # quantiles to -inf; nudge it to the smallest usable uniform instead
        u[u == 0.0] = 1e-300
        return self.inverse_rosenblatt(u)

    def logpdf(self, x) -> np.ndarray:
        X, single = self._as_matrix(x)
        self._check_support(X)
        out = np.zeros(X.shape[0])
        for d, coord in enumerate(self.coordinates):
            out += coord.law.logpdf(X[:, d], X)
        return float(out[0]) if single else out

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    # -- subsets ------------------------------------------------------------

    def resolve_subset(self, subset) -> tuple[int, ...]:
        """Map names or 0-based positions onto coordinate positions."""
        out = []
        for item in subset:
            if isinstance(item, str):
                if item not in self.names:
                    raise DomainError(f"unknown coordinate name {item!r}")
                out.append(self.names.index(item))
            else:
                d = int(item)
                if not 0 <= d < self.dimension:
                    raise DomainError(f"coordinate position {item} out of range")
                out.append(d)
        if not out:
            raise DomainError("subset must be nonempty")
        return tuple(sorted(set(out)))

    def missing_parents(self, subset) -> tuple[int, ...]:
        """Parents required by the subset's laws but absent from the subset."""
        positions = set(self.resolve_subset(subset))
        missing = set()
        for d in positions:
            missing |= set(self.coordinates[d].law.parents) - positions
        return tuple(sorted(missing))

    def validate_subset(self, subset) -> bool:
        """True when every coordinate's parents are inside the subset."""
        return not self.missing_parents(subset)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(model_to_json(self), indent=2, sort_keys=True)

    def fingerprint(self) -> str:
        try:
            payload = self.to_json().encode()
        except DomainError:
            payload = repr(
                [(c.name, c.law.family, c.law.parents) for c in self.coordinates]
            ).encode()
        return hashlib.sha256(payload).hexdigest()


# --------------------------------------------------------------------------
# JSON round trip
# --------------------------------------------------------------------------

_FAMILIES = {
    "uniform": Uniform,
    "normal": Normal,
    "truncated-normal-slice": TruncatedNormalSlice,
    "exponential": Exponential,
    "laplace": Laplace,
    "student-t": StudentT,
    "cauchy": Cauchy,
    "discrete-pmf": DiscretePmf,
    "numeric-grid": NumericGrid,
}


def _param_to_json(param, names):
    if isinstance(param, Const):
        return {"const": param.value}
    if isinstance(param, Affine):
        return {
            "affine": {
                "intercept": param.intercept,
                "weights": {names[d]: w for d, w in param.weights.items()},
            }
        }
    if isinstance(param, ExpAffine):
        body = {
            "intercept": param.intercept,
            "weights": {names[d]: w for d, w in param.weights.items()},
        }
        if param.quad_weights:
            body["quad-weights"] = {names[d]: w for d, w in param.quad_weights.items()}
        return {"exp-affine": body}
    if isinstance(param, InvAffine):
        return {
            "inv-affine": {
                "intercept": param.intercept,
                "weights": {names[d]: w for d, w in param.weights.items()},
            }
        }
    raise DomainError(
        "parameter is not one of the declared serializable forms "
        "(const, affine, exp-affine, inv-affine)"
    )


def _param_from_json(obj, name_to_pos):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise DomainError(f"malformed parameter {obj!r}")
    kind, body = next(iter(obj.items()))
    if kind == "const":
        return Const(float(body))
    weights = {name_to_pos[k]: float(v) for k, v in body.get("weights", {}).items()}
    intercept = float(body.get("intercept", 0.0))
    if kind == "affine":
        return Affine(intercept, weights)
    if kind == "exp-affine":
        quad = {name_to_pos[k]: float(v) for k, v in body.get("quad-weights", {}).items()}
        return ExpAffine(intercept, weights, quad)
    if kind == "inv-affine":
        return InvAffine(intercept, weights)
    raise DomainError(f"unknown parameter form {kind!r}")


def model_to_json(model: ModelSpec) -> dict:
    """Plain-dict rendering of a model, the on-disk format."""
    names = model.names
    coords = []
    for coord in model.coordinates:
        law = coord.law
        if law.family == "discrete-pmf" or law.family == "numeric-grid":
            params = law.params_to_json()
        else:
            params = {
                key: _param_to_json(value, names)
                for key, value in law.params_to_json().items()
            }
        try:
            lo, hi = law.support_bounds(np.zeros((1, model.dimension)))
            support = [
                None if not np.isfinite(lo[0]) else float(lo[0]),
                None if not np.isfinite(hi[0]) else float(hi[0]),
            ]
        except DomainError:
            # parent-dependent support has no single pair of numbers
            support = [None, None]
        coords.append(
            {
                "name": coord.name,
                "family": law.family,
                "params": params,
                "parents": [names[d] for d in law.parents],
                "support": support,
            }
        )
    return {"dimension": model.dimension, "coordinates": coords}


def model_from_json(doc) -> ModelSpec:
    """Build a model from its dict or JSON-string rendering."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if "coordinates" not in doc:
        raise DomainError("model document lacks a 'coordinates' field")
    entries = doc["coordinates"]
    if "dimension" in doc and int(doc["dimension"]) != len(entries):
        raise DomainError("declared dimension disagrees with the coordinate list")
    names = [str(e["name"]) for e in entries]
    name_to_pos = {name: d for d, name in enumerate(names)}
    coords = []
    for d, entry in enumerate(entries):
        family = entry.get("family")
        if family not in _FAMILIES:
            raise DomainError(f"unknown family {family!r}")
        parents = tuple(name_to_pos[p] for p in entry.get("parents", []))
        raw = entry.get("params", {})
        if family == "discrete-pmf":
            law = DiscretePmf(raw["support"], raw["pmf"], parents=parents)
        elif family == "numeric-grid":
            law = NumericGrid(raw["x"], raw["cdf"], raw.get("pdf"), parents=parents)
        else:
            params = {k: _param_from_json(v, name_to_pos) for k, v in raw.items()}
            law = _FAMILIES[family](**params, parents=parents)
        for parent in law.parents:
            if parent >= d:
                raise DomainError(
                    f"coordinate {names[d]!r} lists a parent that is not earlier"
                )
        coords.append(Coordinate(names[d], law))
    return ModelSpec(coords)
