import math

import mpmath
import numpy as np
import pytest

from smoothgof.errors import BracketError, DomainError
from smoothgof.numeric import (
    RngSeed,
    chi2_logsf,
    chi2_sf,
    find_root,
    gauss_legendre,
    product_rule,
    std_normal_cdf,
)


def normal_cdf_by_quadrature(x):
    """Independent oracle: integrate the standard normal density on [0, x]."""
    rule = gauss_legendre(64)
    nodes = rule.nodes * x
    weights = rule.weights * x
    dens = np.exp(-nodes ** 2 / 2) / math.sqrt(2 * math.pi)
    return 0.5 + float(np.dot(weights, dens))


class TestStdNormalCdf:
    def test_symmetry_at_zero(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_tail_limit(self):
        v = std_normal_cdf(8.0)
        assert 1 - 1e-14 < v <= 1.0

    def test_against_quadrature_oracle(self):
        assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
        for x in (0.3, 1.0, 2.5):
            assert std_normal_cdf(x) == pytest.approx(normal_cdf_by_quadrature(x), abs=1e-12)

    def test_reflection_identity(self):
        xs = np.linspace(-6, 6, 41)
        total = std_normal_cdf(xs) + std_normal_cdf(-xs)
        assert np.max(np.abs(total - 1.0)) < 1e-12


def chi2_sf_series_oracle(x, df, terms=2000):
    """Series evaluation of the regularized incomplete gamma, independent path."""
    a = df / 2.0
    z = x / 2.0
    if z == 0:
        return 1.0
    total = 0.0
    term = 1.0 / a
    k = 0
    while k < terms:
        total += term
        k += 1
        term *= z / (a + k)
        if term < total * 1e-18:
            break
    lower = math.exp(a * math.log(z) - z - math.lgamma(a)) * total
    return 1.0 - lower


class TestChi2Sf:
    def test_full_mass_at_zero(self):
        assert chi2_sf(0.0, 5) == 1.0

    def test_quantile_value_df1(self):
        # 2 * (1 - Phi(sqrt(x))) is an exact alternative route for df = 1
        assert chi2_sf(3.841459, 1) == pytest.approx(0.05, abs=1e-6)
        alt = 2 * (1 - std_normal_cdf(math.sqrt(3.841459)))
        assert chi2_sf(3.841459, 1) == pytest.approx(alt, rel=1e-12)

    def test_median_region_df19(self):
        v = chi2_sf(19.0, 19)
        assert 0.4 < v < 0.5
        # brute-force quadrature of the chi-squared density on [0, 19]
        rule = gauss_legendre(128)
        xs = rule.nodes * 19.0
        dens = xs ** (19 / 2 - 1) * np.exp(-xs / 2) / (2 ** (19 / 2) * math.gamma(19 / 2))
        assert v == pytest.approx(1.0 - 19.0 * float(np.dot(rule.weights, dens)), abs=1e-12)

    def test_series_oracle_agreement(self):
        for x, df in ((3.84, 1), (6.0, 19), (30.0, 19), (12.3, 4)):
            assert chi2_sf(x, df) == pytest.approx(chi2_sf_series_oracle(x, df), rel=1e-10)

    def test_monotone_in_x_and_df(self):
        xs = np.linspace(0.1, 40, 50)
        vals = chi2_sf(xs, 7)
        assert np.all(np.diff(vals) < 0)
        for x in (0.5, 5.0, 25.0):
            by_df = [chi2_sf(x, df) for df in range(1, 12)]
            assert all(a < b for a, b in zip(by_df, by_df[1:]))

    def test_df_zero_rejected(self):
        with pytest.raises(DomainError):
            chi2_sf(1.0, 0)

    def test_negative_statistic_rejected(self):
        with pytest.raises(DomainError):
            chi2_sf(-0.5, 3)


class TestChi2LogSf:
    def test_matches_linear_domain(self):
        for x, df in ((1.0, 1), (25.0, 19), (80.0, 19), (120.0, 3), (500.0, 255)):
            assert math.exp(chi2_logsf(x, df)) == pytest.approx(chi2_sf(x, df), rel=1e-10)

    @pytest.mark.parametrize(
        "x,df",
        [(700.0, 19), (1300.0, 3), (800.0, 1), (2200.0, 255), (66000.0, 16383)],
    )
    def test_deep_tail_against_mpmath(self, x, df):
        # p-values here range from ~1e-130 down to far below double precision
        with mpmath.workdps(60):
            expected = mpmath.log(mpmath.gammainc(df / 2, x / 2, mpmath.inf, regularized=True))
        assert chi2_logsf(x, df) == pytest.approx(float(expected), rel=1e-10)

    def test_relative_accuracy_at_1e130(self):
        # df = 3 puts p ~ 1e-130 near x = 1208
        x, df = 1208.0, 3
        with mpmath.workdps(60):
            expected = float(
                mpmath.log(mpmath.gammainc(df / 2, x / 2, mpmath.inf, regularized=True))
            )
        assert expected / math.log(10) < -125
        assert chi2_logsf(x, df) == pytest.approx(expected, rel=1e-12)


class TestGaussLegendre:
    def test_single_node_is_midpoint(self):
        rule = gauss_legendre(1)
        assert rule.nodes[0] == pytest.approx(0.5)
        assert rule.weights[0] == pytest.approx(1.0)

    def test_two_nodes(self):
        rule = gauss_legendre(2)
        offset = 1.0 / (2.0 * math.sqrt(3.0))
        assert rule.nodes == pytest.approx([0.5 - offset, 0.5 + offset])
        assert rule.weights == pytest.approx([0.5, 0.5])

    def test_quartic_exactness(self):
        rule = gauss_legendre(16)
        assert rule.integrate(lambda u: u ** 4) == pytest.approx(0.2, abs=1e-14)

    def test_monomial_exactness_n32(self):
        rule = gauss_legendre(32)
        for j in range(9):
            assert rule.integrate(lambda u, j=j: u ** j) == pytest.approx(
                1.0 / (j + 1), abs=1e-13
            )

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            gauss_legendre(0)
        with pytest.raises(DomainError):
            gauss_legendre(513)

    def test_product_rule_cube(self):
        pts, w = product_rule(gauss_legendre(5), 3)
        assert pts.shape == (125, 3)
        assert w.sum() == pytest.approx(1.0)
        # integrate u1 * u2^2 * u3^3 exactly
        val = float(np.dot(w, pts[:, 0] * pts[:, 1] ** 2 * pts[:, 2] ** 3))
        assert val == pytest.approx(0.5 * (1 / 3) * 0.25, abs=1e-14)


class TestFindRoot:
    def test_linear(self):
        assert find_root(lambda x: x - 2, 0, 5, 1e-10) == pytest.approx(2.0, abs=1e-10)

    def test_sqrt2(self):
        root = find_root(lambda x: x * x - 2, 0, 2)
        assert root == pytest.approx(math.sqrt(2), abs=1e-8)

    def test_monotone_cubic(self):
        root = find_root(lambda x: x ** 3 - 8, 0, 5, 1e-12)
        assert root == pytest.approx(2.0, abs=1e-10)

    def test_band_equation_shape(self):
        # Same functional form as the excursion-probability root equation;
        # curvature values of this size put the root near 3.5 at alpha = 0.05.
        l1, l2 = 6.9, 23.3
        alpha = 0.05

        def lhs(c):
            e = math.exp(-c * c / 2.0)
            return (
                (1 - std_normal_cdf(c))
                + l1 * e / math.pi
                + l2 * c * e / (math.sqrt(2.0) * math.pi ** 1.5)
                - alpha / 2.0
            )

        root = find_root(lhs, 1, 10, 1e-8)
        assert root == pytest.approx(3.5568, abs=0.15)

    def test_no_sign_change_raises(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1, -1, 1)


class TestRngSeed:
    def test_reproducible(self):
        a = RngSeed(12, 5).generator().standard_normal(8)
        b = RngSeed(12, 5).generator().standard_normal(8)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RngSeed(12, 0).generator().standard_normal(8)
        b = RngSeed(12, 1).generator().standard_normal(8)
        assert not np.allclose(a, b)

    def test_stream_independence_is_statistical(self):
        draws = np.stack(
            [RngSeed(7, s).generator().standard_normal(4000) for s in range(6)]
        )
        corr = np.corrcoef(draws)
        off = corr[np.triu_indices(6, 1)]
        assert np.max(np.abs(off)) < 4.0 / math.sqrt(4000)
