import math

import numpy as np
import pytest

from smoothgof.basis import BasisConfig
from smoothgof.errors import DomainError
from smoothgof.estimate import CoefficientSet, fit
from smoothgof.numeric import RngSeed
from smoothgof.select import penalty_per_term, select


def coeffs_from(theta, n, degrees=(4, 3)):
    config = BasisConfig(degrees)
    full = np.zeros(config.size)
    full[: len(theta)] = theta
    return CoefficientSet(config, full, n)


class TestSelect:
    def test_all_zero_keeps_nothing(self):
        coeffs = coeffs_from([], 1000)
        res = select(coeffs, "aic")
        assert res.k_star == 0
        assert res.active.size == 0
        assert res.criterion_path[0] == 0.0

    def test_bic_penalty_arithmetic(self):
        # squared path (0.010, 0.0001, 0, ...) with n = 1000:
        # the first term beats log(1000)/1000 ~ 0.0069, the second does not
        coeffs = coeffs_from([math.sqrt(0.010), math.sqrt(0.0001)], 1000)
        res = select(coeffs, "bic")
        assert res.k_star == 1
        assert res.criterion_path[1] == pytest.approx(0.010 - math.log(1000) / 1000)
        assert res.criterion_path[2] < res.criterion_path[1]

    def test_order_is_by_decreasing_square(self):
        coeffs = coeffs_from([0.01, -0.3, 0.2, -0.05], 500)
        res = select(coeffs, "aic")
        sq = coeffs.theta ** 2
        assert np.all(np.diff(sq[res.order]) <= 0)

    def test_argmax_equals_first_crossing(self):
        rng = RngSeed(31).generator()
        for _ in range(200):
            coeffs = CoefficientSet(
                BasisConfig((4, 3)), rng.normal(0, 0.05, 19), int(rng.integers(10, 5000))
            )
            crit = "aic" if rng.random() < 0.5 else "bic"
            res = select(coeffs, crit)
            pen = penalty_per_term(crit, coeffs.n)
            sq = np.sort(coeffs.theta ** 2)[::-1]
            crossing = int(np.sum(sq > pen))
            assert res.k_star == crossing

    def test_bic_never_keeps_more_than_aic(self):
        rng = RngSeed(32).generator()
        for _ in range(100):
            n = int(rng.integers(8, 3000))
            coeffs = CoefficientSet(BasisConfig((3, 3)), rng.normal(0, 0.08, 15), n)
            assert select(coeffs, "bic").k_star <= select(coeffs, "aic").k_star

    def test_enumeration_order_invariance(self):
        rng = RngSeed(33).generator()
        theta = rng.normal(0, 0.1, 15)
        coeffs = CoefficientSet(BasisConfig((3, 3)), theta, 400)
        res = select(coeffs, "aic")
        perm = rng.permutation(15)
        permuted = CoefficientSet(BasisConfig((3, 3)), theta[perm], 400)
        res_p = select(permuted, "aic")
        assert res_p.k_star == res.k_star
        kept = np.sort(theta[res.active])
        kept_p = np.sort(theta[perm][res_p.active])
        assert kept == pytest.approx(kept_p)

    def test_needs_two_observations(self):
        coeffs = coeffs_from([0.1], 1)
        with pytest.raises(DomainError):
            select(coeffs, "aic")

    def test_unknown_criterion_rejected(self):
        coeffs = coeffs_from([0.1], 100)
        with pytest.raises(DomainError):
            select(coeffs, "waic")

    def test_ties_resolve_to_smallest_count(self):
        # two equal coefficients exactly at the penalty give a flat path
        n = 100
        pen = penalty_per_term("aic", n)
        theta = np.array([math.sqrt(pen), math.sqrt(pen), 0.0])
        coeffs = CoefficientSet(BasisConfig((1, 1)), theta, n)
        res = select(coeffs, "aic")
        assert res.k_star == 0

    def test_selection_on_fitted_sample(self):
        rng = RngSeed(34).generator()
        coeffs = fit(rng.random((500, 2)), BasisConfig((4, 3)))
        res = select(coeffs, "aic")
        assert 0 <= res.k_star <= 19
        assert res.criterion_path.shape == (20,)
