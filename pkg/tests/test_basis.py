import math

import numpy as np
import pytest

from smoothgof.basis import (
    BasisConfig,
    DiscreteMarginal,
    enumerate_K,
    legendre_eval,
    legendre_table,
    lp_discrete_basis,
    tensor_eval,
    tensor_table,
)
from smoothgof.errors import DomainError, RankError
from smoothgof.numeric import gauss_legendre, product_rule


class TestLegendre:
    def test_degree_zero_is_one(self):
        for u in (0.0, 0.31, 1.0):
            assert legendre_eval(0, u) == 1.0

    def test_linear_vanishes_at_center(self):
        assert legendre_eval(1, 0.5) == pytest.approx(0.0, abs=1e-14)

    def test_linear_closed_form(self):
        us = np.linspace(0, 1, 11)
        assert legendre_eval(1, us) == pytest.approx(math.sqrt(12) * (us - 0.5))

    def test_quadratic_at_zero(self):
        # Gram-Schmidt on {1, u, u^2} over [0,1] gives sqrt(5)(6u^2 - 6u + 1)
        assert legendre_eval(2, 0.0) == pytest.approx(math.sqrt(5), abs=1e-10)
        us = np.linspace(0, 1, 17)
        closed = math.sqrt(5) * (6 * us ** 2 - 6 * us + 1)
        assert legendre_eval(2, us) == pytest.approx(closed, abs=1e-12)

    def test_domain_checked(self):
        with pytest.raises(DomainError):
            legendre_eval(3, -0.01)
        with pytest.raises(DomainError):
            legendre_eval(3, 1.01)
        with pytest.raises(DomainError):
            legendre_table(0.5, 33)

    def test_orthonormal_to_degree_six(self):
        rule = gauss_legendre(32)
        table = legendre_table(rule.nodes, 6)
        gram = (table * rule.weights[:, None]).T @ table
        assert np.max(np.abs(gram - np.eye(7))) < 1e-10

    def test_high_degree_recurrence_stable(self):
        # unit norm survives up to the degree cap
        rule = gauss_legendre(128)
        table = legendre_table(rule.nodes, 32)
        norms = rule.weights @ (table ** 2)
        assert norms == pytest.approx(np.ones(33), abs=1e-11)


class TestTensor:
    def test_zero_index_constant(self):
        assert tensor_eval((0, 0), np.array([0.3, 0.9])) == pytest.approx(1.0)

    def test_vanishing_factor(self):
        assert tensor_eval((1, 1), np.array([0.5, 0.2])) == pytest.approx(0.0, abs=1e-14)

    def test_corner_product(self):
        # both factors are sqrt(12) * 0.5 at u = 1
        assert tensor_eval((1, 1), np.array([1.0, 1.0])) == pytest.approx(3.0, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            tensor_eval((1, 1, 0), np.array([0.5, 0.2]))

    def test_tensor_orthonormality_2d(self):
        config = BasisConfig((3, 3))
        rule = gauss_legendre(24)
        pts, w = product_rule(rule, 2)
        table = tensor_table(config, pts)
        gram = (table * w[:, None]).T @ table
        assert np.max(np.abs(gram - np.eye(config.size))) < 1e-9

    def test_zero_mean_over_cube(self):
        config = BasisConfig((3, 2))
        pts, w = product_rule(gauss_legendre(16), 2)
        table = tensor_table(config, pts)
        means = w @ table
        assert np.max(np.abs(means)) < 1e-10


class TestEnumerateK:
    def test_small_exhaustive(self):
        config = BasisConfig((1, 1))
        assert enumerate_K(config) == [(0, 1), (1, 0), (1, 1)]
        assert config.size == 3

    def test_example_sizes(self):
        assert BasisConfig((4, 3)).size == 19
        assert len(enumerate_K(BasisConfig((4, 3)))) == 19
        assert BasisConfig((3,) * 7).size == 16383

    def test_deterministic_lexicographic(self):
        ks = enumerate_K(BasisConfig((2, 2)))
        assert ks == sorted(ks)
        assert (0, 0) not in ks


class TestDiscreteBasis:
    def test_bernoulli_half(self):
        marg = DiscreteMarginal(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
        table = lp_discrete_basis(marg, 1)
        assert table[:, 0] == pytest.approx([1.0, 1.0])
        assert table[:, 1] == pytest.approx([-1.0, 1.0])

    def test_continuous_limit_matches_legendre(self):
        n = 10_000
        support = np.arange(1, n + 1, dtype=float)
        marg = DiscreteMarginal(support, np.full(n, 1.0 / n))
        table = lp_discrete_basis(marg, 1)
        legendre = math.sqrt(12) * (marg.cdf - 0.5)
        assert np.max(np.abs(table[:, 1] - legendre)) <= 1e-2

    def test_binomial_gram_identity(self):
        from scipy.stats import binom

        support = np.arange(6, dtype=float)
        pmf = binom.pmf(support, 5, 0.3)
        marg = DiscreteMarginal(support, pmf / pmf.sum())
        table = lp_discrete_basis(marg, 3)
        gram = (table * marg.pmf[:, None]).T @ table
        assert np.max(np.abs(gram - np.eye(4))) < 1e-10

    def test_irregular_pmf_gram_identity(self):
        marg = DiscreteMarginal(
            np.array([-2.0, 0.5, 1.0, 7.5]), np.array([0.05, 0.4, 0.35, 0.2])
        )
        table = lp_discrete_basis(marg, 3)
        gram = (table * marg.pmf[:, None]).T @ table
        assert np.max(np.abs(gram - np.eye(4))) < 1e-10

    def test_rank_error_when_degree_too_large(self):
        marg = DiscreteMarginal(np.array([0.0, 1.0, 2.0]), np.array([0.2, 0.5, 0.3]))
        with pytest.raises(RankError):
            lp_discrete_basis(marg, 3)

    def test_degenerate_support_rejected(self):
        with pytest.raises(DomainError):
            DiscreteMarginal(np.array([1.0, 1.0]), np.array([0.5, 0.5]))
        single = DiscreteMarginal(np.array([3.0]), np.array([1.0]))
        with pytest.raises(DomainError):
            lp_discrete_basis(single, 1)


class TestBasisConfig:
    def test_validation(self):
        with pytest.raises(DomainError):
            BasisConfig(())
        with pytest.raises(DomainError):
            BasisConfig((0, 2))
        with pytest.raises(DomainError):
            BasisConfig((33,))
