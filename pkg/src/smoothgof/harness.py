"""Catalog of worked example models and the simulation studies over them.

Two example settings recur throughout the tests and demos: a bivariate
energy-region model (a rectangle-truncated Gaussian null against a
two-component truncated Gaussian mixture) and a seven-dimensional chain
whose hypothesized version misstates one conditional location, one
marginal rate and one tail family.  A uniform-on-disc background model is
included with a documented synthetic perturbation standing in for real
instrument data, which is not bundled.

Studies draw replicates on deterministic per-replicate streams, so results
are reproducible bit for bit and independent of worker count.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .basis import BasisConfig, enumerate_K, tensor_table
from .errors import DomainError
from .estimate import fit
from .infer import subset_index_mask
from .model import (
    Affine,
    Cauchy,
    Coordinate,
    ExpAffine,
    Exponential,
    InvAffine,
    Laplace,
    ModelSpec,
    Normal,
    NumericGrid,
    StudentT,
    TruncatedNormalSlice,
    Uniform,
)
from .numeric import RngSeed, as_generator, chi2_sf, gauss_legendre
from .select import select

__all__ = [
    "TruncatedBivariateNormal",
    "MixtureModel",
    "SeriesTiltModel",
    "catalog",
    "catalog_names",
    "StudyConfig",
    "StudyResult",
    "type1_power_study",
    "diagnostic_study",
    "example2_subsets",
]

ENERGY_RECT = (5.0, 20.0, 0.0, 17.0)
DISC_CENTER = (195.0, 28.0)
DISC_RADIUS = 30.0


# --------------------------------------------------------------------------
# sampling/density models that are not conditional chains
# --------------------------------------------------------------------------


class TruncatedBivariateNormal:
    """A bivariate normal restricted to a rectangle and renormalized.

    Exposes the closed-form pieces the catalog needs: the conditional slice
    of the second coordinate, the quadrature-normalized marginal of the
    first, exact rejection sampling, and the joint density.
    """

    def __init__(self, mean, cov, rect):
        self.mean = np.asarray(mean, dtype=float)
        self.cov = np.asarray(cov, dtype=float)
        self.rect = tuple(float(v) for v in rect)
        if self.cov.shape != (2, 2) or np.linalg.det(self.cov) <= 0:
            raise DomainError("covariance must be 2 x 2 positive definite")
        self._chol = np.linalg.cholesky(self.cov)
        self.sd1 = math.sqrt(self.cov[0, 0])
        self.cond_slope = self.cov[0, 1] / self.cov[0, 0]
        self.cond_intercept = self.mean[1] - self.cond_slope * self.mean[0]
        self.cond_sd = math.sqrt(self.cov[1, 1] - self.cov[0, 1] ** 2 / self.cov[0, 0])
        rule = gauss_legendre(200)
        lo1, hi1, _, _ = self.rect
        xs = lo1 + rule.nodes * (hi1 - lo1)
        self.mass = float(np.dot(rule.weights * (hi1 - lo1), self._marginal_unnorm(xs)))

    @property
    def dimension(self) -> int:
        return 2

    def _phi(self, z):
        return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)

    def _cond_mass(self, x1):
        from scipy.special import ndtr

        _, _, lo2, hi2 = self.rect
        m = self.cond_intercept + self.cond_slope * x1
        return ndtr((hi2 - m) / self.cond_sd) - ndtr((lo2 - m) / self.cond_sd)

    def _marginal_unnorm(self, x1):
        return self._phi((x1 - self.mean[0]) / self.sd1) / self.sd1 * self._cond_mass(x1)

    def marginal_density(self, x1):
        """Density of the first coordinate under the truncated joint."""
        return self._marginal_unnorm(np.asarray(x1, dtype=float)) / self.mass

    def pdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        lo1, hi1, lo2, hi2 = self.rect
        inside = (
            (x[:, 0] >= lo1) & (x[:, 0] <= hi1) & (x[:, 1] >= lo2) & (x[:, 1] <= hi2)
        )
        diff = x - self.mean
        inv = np.linalg.inv(self.cov)
        q = np.einsum("ni,ij,nj->n", diff, inv, diff)
        dens = np.exp(-0.5 * q) / (2.0 * math.pi * math.sqrt(np.linalg.det(self.cov)))
        return np.where(inside, dens / self.mass, 0.0)

    def sample(self, n: int, seed) -> np.ndarray:
        """Exact draws by rejection from the untruncated Gaussian."""
        if n < 1:
            raise DomainError("sample size must be positive")
        rng = as_generator(seed)
        lo1, hi1, lo2, hi2 = self.rect
        out = np.empty((0, 2))
        while len(out) < n:
            m = int((n - len(out)) / max(self.mass, 0.05) * 1.2) + 16
            z = rng.standard_normal((m, 2)) @ self._chol.T + self.mean
            keep = (
                (z[:, 0] >= lo1) & (z[:, 0] <= hi1) & (z[:, 1] >= lo2) & (z[:, 1] <= hi2)
            )
            out = np.vstack([out, z[keep]])
        return out[:n]

    def chain(self) -> ModelSpec:
        """The same law written as marginal x conditional, as a model chain.

        The marginal has no elementary closed form; it is tabulated by
        panel quadrature of the mass-weighted Gaussian and carried as a
        grid law with its exact density at the knots.
        """
        lo1, hi1, lo2, hi2 = self.rect
        xs, cdf, pdf = _tabulate_cdf(self.marginal_density, lo1, hi1)
        marginal = NumericGrid(xs, cdf, pdf)
        conditional = TruncatedNormalSlice(
            Affine(self.cond_intercept, {0: self.cond_slope}),
            self.cond_sd,
            lo2,
            hi2,
            parents=(0,),
        )
        return ModelSpec([("x1", marginal), ("x2", conditional)])


class MixtureModel:
    """Finite mixture of sampling/density models on a common support."""

    def __init__(self, components, weights):
        self.components = tuple(components)
        self.weights = np.asarray(weights, dtype=float)
        if len(self.components) != len(self.weights) or len(self.components) < 1:
            raise DomainError("components and weights must match")
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise DomainError("weights must be positive and sum to 1")
        dims = {c.dimension for c in self.components}
        if len(dims) != 1:
            raise DomainError("components must share a dimension")
        self.dimension = dims.pop()

    def pdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0])
        for w, comp in zip(self.weights, self.components):
            out += w * comp.pdf(x)
        return out

    def sample(self, n: int, seed) -> np.ndarray:
        if n < 1:
            raise DomainError("sample size must be positive")
        rng = as_generator(seed)
        labels = np.searchsorted(np.cumsum(self.weights), rng.random(int(n)), side="right")
        out = np.empty((int(n), self.dimension))
        for i, comp in enumerate(self.components):
            take = labels == i
            cnt = int(take.sum())
            if cnt:
                out[take] = comp.sample(cnt, rng)
        return out


class SeriesTiltModel:
    """A base chain tilted by a low-order expansion on the cube.

    The tilt is a polynomial comparison density 1 + sum(theta_k T_k) that
    must stay positive; sampling rejects uniform cube proposals against the
    tilt and maps survivors through the base quantile chain.  Used to build
    documented synthetic alternatives whose expansion coefficients are known
    exactly.
    """

    def __init__(self, base: ModelSpec, coefficients: dict):
        self.base = base
        self.coefficients = dict(coefficients)
        p = base.dimension
        degrees = [1] * p
        for k in self.coefficients:
            if len(k) != p:
                raise DomainError("tilt indices must match the base dimension")
            for d, j in enumerate(k):
                degrees[d] = max(degrees[d], int(j))
        self.config = BasisConfig(tuple(degrees))
        self.theta = np.zeros(self.config.size)
        positions = {k: i for i, k in enumerate(enumerate_K(self.config))}
        for k, v in self.coefficients.items():
            self.theta[positions[tuple(int(j) for j in k)]] = float(v)
        res = 201 if p <= 2 else 41
        grid = np.meshgrid(*([np.linspace(0, 1, res)] * p), indexing="ij")
        pts = np.stack([g.ravel() for g in grid], axis=1)
        vals = self.tilt(pts)
        if vals.min() <= 0:
            raise DomainError("the tilt must stay positive on the cube")
        # lattice max underestimates the true polynomial max by O(h^2);
        # inflating keeps the rejection envelope valid
        self._tilt_max = float(vals.max()) * 1.001 + 1e-9

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def tilt(self, u) -> np.ndarray:
        table = tensor_table(self.config, np.atleast_2d(u))
        return 1.0 + table @ self.theta

    def pdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.exp(self.base.logpdf(x)) * self.tilt(self.base.rosenblatt(x))

    def sample(self, n: int, seed) -> np.ndarray:
        if n < 1:
            raise DomainError("sample size must be positive")
        rng = as_generator(seed)
        p = self.dimension
        rows = np.empty((0, p))
        while len(rows) < n:
            m = int((n - len(rows)) * self._tilt_max * 1.2) + 16
            u = rng.random((m, p))
            keep = rng.random(m) * self._tilt_max < self.tilt(u)
            rows = np.vstack([rows, u[keep]])
        u = rows[:n]
        u[u == 0.0] = 1e-300
        return self.base.inverse_rosenblatt(u)


# --------------------------------------------------------------------------
# catalog
# --------------------------------------------------------------------------


def _tabulate_cdf(density, lo, hi, knots=1201, nodes=16):
    """Knots, cdf and density tabulation by per-panel Gauss quadrature."""
    xs = np.linspace(lo, hi, knots)
    rule = gauss_legendre(nodes)
    left = xs[:-1, None]
    width = np.diff(xs)[:, None]
    pts = left + rule.nodes[None, :] * width
    vals = np.asarray(density(pts.ravel()), dtype=float).reshape(pts.shape)
    panel = (vals * rule.weights[None, :]).sum(axis=1) * width[:, 0]
    cdf = np.concatenate([[0.0], np.cumsum(panel)])
    total = cdf[-1]
    cdf = np.clip(cdf / total, 0.0, None)
    cdf[-1] = 1.0
    return xs, cdf, np.asarray(density(xs), dtype=float) / total


def _energy_null_component() -> TruncatedBivariateNormal:
    return TruncatedBivariateNormal(
        (12.0, 8.0), [[8.0, 2.0], [2.0, 12.0]], ENERGY_RECT
    )


def _energy_extra_component() -> TruncatedBivariateNormal:
    return TruncatedBivariateNormal(
        (12.0, 8.0), [[4.0, 5.0], [5.0, 20.0]], ENERGY_RECT
    )


def _example1_null() -> ModelSpec:
    return _energy_null_component().chain()


def _example1_truth() -> MixtureModel:
    return MixtureModel(
        [_energy_null_component(), _energy_extra_component()], [0.85, 0.15]
    )


def _example2_coordinates(correct: bool) -> ModelSpec:
    """Seven-coordinate chain; ``correct`` picks the data-generating version.

    Transform order: X1, X2, X5, X6, X3, X4, X7, i.e. the Gaussian block
    with its dependent coordinate first, then the exponential pair, then
    the heavy-tailed marginal.
    """
    mu = np.array([10.0, 15.0, 11.0])
    cov = np.array([[4.0, 0.5, 0.0], [0.5, 3.0, 1.0], [0.0, 1.0, 5.0]])
    # X2 | X1 and X5 | X1, X2 regressions from the Gaussian block
    s2 = math.sqrt(cov[1, 1] - cov[0, 1] ** 2 / cov[0, 0])
    b2 = cov[0, 1] / cov[0, 0]
    beta5 = np.linalg.solve(cov[:2, :2], cov[:2, 2])
    s5 = math.sqrt(cov[2, 2] - cov[:2, 2] @ beta5)
    a5 = mu[2] - beta5 @ mu[:2]

    loc6 = {"intercept": 0.0, "weights": {0: 0.03, 1: 0.02, 2: 0.02}}
    quad6 = {1: 0.01} if correct else {}
    rate3 = 1.0 if correct else 0.9
    tail7 = StudentT(3.0) if correct else Cauchy(0.0, 1.0)

    return ModelSpec(
        [
            ("X1", Normal(mu[0], math.sqrt(cov[0, 0]))),
            ("X2", Normal(Affine(mu[1] - b2 * mu[0], {0: b2}), s2, parents=(0,))),
            (
                "X5",
                Normal(
                    Affine(a5, {0: beta5[0], 1: beta5[1]}), s5, parents=(0, 1)
                ),
            ),
            (
                "X6",
                Laplace(
                    ExpAffine(loc6["intercept"], loc6["weights"], quad6),
                    1.0,
                    parents=(0, 1, 2),
                ),
            ),
            ("X3", Exponential(rate3)),
            ("X4", Exponential(InvAffine(0.0, {4: 1.0}), parents=(4,))),
            ("X7", tail7),
        ]
    )


@dataclass(frozen=True)
class _DiscChord:
    """One edge of the vertical chord of a disc, as a function of x1."""

    center_x: float
    center_y: float
    radius: float
    sign: float

    def __call__(self, X: np.ndarray) -> np.ndarray:
        t = X[:, 0] - self.center_x
        half = np.sqrt(np.maximum(self.radius ** 2 - t ** 2, 0.0))
        return self.center_y + self.sign * half


def _disc_marginal_cdf(x1):
    t = np.clip((np.asarray(x1, dtype=float) - DISC_CENTER[0]) / DISC_RADIUS, -1, 1)
    return (t * np.sqrt(1.0 - t * t) + np.arcsin(t)) / math.pi + 0.5


def _disc_marginal_pdf(x1):
    t = np.clip((np.asarray(x1, dtype=float) - DISC_CENTER[0]) / DISC_RADIUS, -1, 1)
    return 2.0 * np.sqrt(1.0 - t * t) / (math.pi * DISC_RADIUS)


def _fermi_disc_uniform() -> ModelSpec:
    cx, cy = DISC_CENTER
    r = DISC_RADIUS
    xs = np.linspace(cx - r, cx + r, 1201)
    marginal = NumericGrid(xs, _disc_marginal_cdf(xs), _disc_marginal_pdf(xs))
    conditional = Uniform(
        _DiscChord(cx, cy, r, -1.0), _DiscChord(cx, cy, r, +1.0), parents=(0,)
    )
    return ModelSpec([("x1", marginal), ("x2", conditional)])


def _fermi_disc_perturbed() -> SeriesTiltModel:
    # synthetic sky-background inhomogeneity: a mild tilt along both axes
    # with a bowl-shaped second-order term; entirely artificial, chosen only
    # so that fits on it produce coefficients with this sign pattern
    return SeriesTiltModel(
        _fermi_disc_uniform(),
        {(1, 0): 0.022, (0, 1): -0.043, (0, 2): 0.041},
    )


_CATALOG = {
    "example1-null": _example1_null,
    "example1-truth": _example1_truth,
    "example2-null": lambda: _example2_coordinates(correct=False),
    "example2-truth": lambda: _example2_coordinates(correct=True),
    "fermi-disc-uniform": _fermi_disc_uniform,
    "fermi-disc-perturbed": _fermi_disc_perturbed,
}


def catalog_names() -> tuple[str, ...]:
    return tuple(sorted(_CATALOG))


@functools.lru_cache(maxsize=None)
def catalog(name: str):
    """Fully parameterized example model by name.

    Chain models come back as :class:`ModelSpec`; the mixture truth and the
    perturbed disc are sampling/density models with the same ``sample`` and
    ``pdf`` surface (a two-component mixture is not expressible as a chain
    of the declared families).
    """
    try:
        builder = _CATALOG[name]
    except KeyError:
        raise KeyError(
            f"unknown model name {name!r}; available: {', '.join(catalog_names())}"
        ) from None
    return builder()


def example2_subsets() -> list[list[str]]:
    """The diagnostic battery of the seven-coordinate example."""
    return [
        ["X1", "X2", "X5", "X6", "X3", "X4", "X7"],
        ["X1", "X2", "X5", "X6"],
        ["X1", "X2", "X5"],
        ["X3", "X4"],
        ["X3"],
        ["X7"],
    ]


# --------------------------------------------------------------------------
# simulation studies
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StudyConfig:
    """One simulation study: sample ``truth``, test against ``null``.

    ``criterion`` selects the coefficient-selection flavor used before the
    deviance bound; None runs the full-vector test, which is what the
    type-I and power tables use.  The seed is a base stream; replicate r
    always runs on stream ``seed.child(r)``.
    """

    truth: object
    null: ModelSpec
    n: int
    b: int
    degrees: BasisConfig
    alpha: float = 0.05
    criterion: str | None = None
    seed: RngSeed = RngSeed(0)

    def __post_init__(self):
        if self.truth.dimension != self.null.dimension:
            raise DomainError("truth and null must share a dimension")
        if self.degrees.dimension != self.null.dimension:
            raise DomainError("degrees and models must share a dimension")
        if self.n < 2 or self.b < 1:
            raise DomainError("need n >= 2 and at least one replicate")


@dataclass(frozen=True)
class StudyResult:
    """Monte Carlo rejection rate with its binomial standard error."""

    rejection_rate: float
    standard_error: float
    b: int
    subsets: dict | None = None

    @staticmethod
    def from_count(count: int, b: int, subsets=None) -> "StudyResult":
        rate = count / b
        return StudyResult(rate, math.sqrt(rate * (1.0 - rate) / b), b, subsets)


def _deviance_replicate(config: StudyConfig, r: int) -> bool:
    rng = config.seed.child(r).generator()
    x = config.truth.sample(config.n, rng)
    u = config.null.rosenblatt(x)
    coeffs = fit(u, config.degrees, with_cov=False)
    if config.criterion is None:
        stat = config.n * float(np.sum(coeffs.theta ** 2))
    else:
        sel = select(coeffs, config.criterion)
        stat = config.n * float(np.sum(coeffs.theta[sel.active] ** 2))
    return chi2_sf(stat, config.degrees.size) < config.alpha


def _deviance_chunk(args) -> int:
    config, start, stop = args
    return sum(_deviance_replicate(config, r) for r in range(start, stop))


def type1_power_study(config: StudyConfig, threads: int = 1) -> StudyResult:
    """Rejection rate of the deviance test at level alpha.

    Sampling from the null model measures the type-I error; sampling from an
    alternative measures power.
    """
    count = _run_chunks(_deviance_chunk, config, threads)
    return StudyResult.from_count(count, config.b)


def _diagnostic_replicate(config: StudyConfig, masks: list[np.ndarray], r: int):
    rng = config.seed.child(r).generator()
    x = config.truth.sample(config.n, rng)
    u = config.null.rosenblatt(x)
    coeffs = fit(u, config.degrees, with_cov=False)
    criterion = config.criterion or "bic"
    sel = select(coeffs, criterion)
    sel_mask = np.zeros(config.degrees.size, dtype=bool)
    sel_mask[sel.active] = True
    v = config.n * coeffs.theta ** 2
    out = []
    for mask in masks:
        stat = float(v[mask & sel_mask].sum())
        out.append(chi2_sf(stat, int(mask.sum())) < config.alpha)
    return out


def _diagnostic_chunk(args):
    config, masks, start, stop = args
    counts = np.zeros(len(masks), dtype=int)
    for r in range(start, stop):
        counts += np.asarray(_diagnostic_replicate(config, masks, r), dtype=int)
    return counts


def diagnostic_study(config: StudyConfig, subsets, threads: int = 1) -> StudyResult:
    """Per-subset rejection rates of the selection-robust restricted tests.

    Subsets must be closed under conditioning parents in the null model.
    The headline rate is the first subset's; the ``subsets`` map carries one
    (rate, standard error) pair per requested subset, keyed by its labels.
    """
    resolved = []
    for subset in subsets:
        positions = config.null.resolve_subset(subset)
        missing = config.null.missing_parents(positions)
        if missing:
            from .errors import MarginalityError

            raise MarginalityError(
                f"subset {subset!r} is missing parents "
                f"{[config.null.names[d] for d in missing]}",
                missing=missing,
            )
        resolved.append(positions)
    masks = [subset_index_mask(config.degrees, pos) for pos in resolved]

    if threads <= 1:
        counts = _diagnostic_chunk((config, masks, 0, config.b))
    else:
        bounds = np.linspace(0, config.b, threads + 1, dtype=int)
        args = [(config, masks, int(a), int(z)) for a, z in zip(bounds, bounds[1:])]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            counts = sum(pool.map(_diagnostic_chunk, args))

    per_subset = {}
    for positions, count in zip(resolved, counts):
        label = ",".join(config.null.names[d] for d in positions)
        rate = count / config.b
        per_subset[label] = (rate, math.sqrt(rate * (1 - rate) / config.b))
    head = counts[0] if len(counts) else 0
    return StudyResult.from_count(int(head), config.b, per_subset)


def _run_chunks(chunk_fn, config: StudyConfig, threads: int) -> int:
    if threads <= 1:
        return chunk_fn((config, 0, config.b))
    bounds = np.linspace(0, config.b, threads + 1, dtype=int)
    args = [(config, int(a), int(z)) for a, z in zip(bounds, bounds[1:])]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return sum(pool.map(chunk_fn, args))
