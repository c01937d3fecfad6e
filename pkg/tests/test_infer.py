import numpy as np
import pytest

from smoothgof.basis import BasisConfig, enumerate_K
from smoothgof.errors import MarginalityError
from smoothgof.estimate import CoefficientSet
from smoothgof.infer import (
    deviance_test,
    diagnose,
    diagnostic_table,
    subset_index_mask,
)
from smoothgof.model import (
    Affine,
    Cauchy,
    Exponential,
    ExpAffine,
    InvAffine,
    Laplace,
    ModelSpec,
    Normal,
)
from smoothgof.numeric import RngSeed, chi2_sf
from smoothgof.select import SelectionResult, select


def seven_coordinate_chain():
    """Chain with the dependence pattern of the 7-d diagnostic example."""
    return ModelSpec(
        [
            ("X1", Normal(10.0, 2.0)),
            ("X2", Normal(Affine(13.75, {0: 0.125}), 1.7139, parents=(0,))),
            (
                "X5",
                Normal(
                    Affine(6.3192, {0: -0.04255, 1: 0.34043}), 2.1586, parents=(0, 1)
                ),
            ),
            (
                "X6",
                Laplace(
                    ExpAffine(0.0, {0: 0.03, 1: 0.02, 2: 0.02}), 1.0, parents=(0, 1, 2)
                ),
            ),
            ("X3", Exponential(0.9)),
            ("X4", Exponential(InvAffine(0.0, {4: 1.0}), parents=(4,))),
            ("X7", Cauchy(0.0, 1.0)),
        ]
    )


def manual_selection(coeffs, k_star):
    order = np.argsort(-(coeffs.theta ** 2), kind="stable")
    return SelectionResult("aic", order, k_star, np.zeros(coeffs.config.size + 1))


class TestDevianceTest:
    def test_zero_coefficients(self):
        coeffs = CoefficientSet(BasisConfig((4, 3)), np.zeros(19), 100)
        report = deviance_test(coeffs)
        assert report.statistic == 0.0
        assert report.p_value == 1.0
        assert report.adjusted is False
        assert report.df == report.m == 19

    def test_three_small_coefficients_arithmetic(self):
        theta = np.zeros(19)
        theta[:3] = 0.02
        coeffs = CoefficientSet(BasisConfig((4, 3)), theta, 5000)
        report = deviance_test(coeffs, manual_selection(coeffs, 3))
        assert report.statistic == pytest.approx(6.0, abs=1e-10)
        assert report.df == 19
        assert report.adjusted is True
        assert report.k_star == 3
        assert report.p_value == pytest.approx(chi2_sf(6.0, 19), rel=1e-12)
        # mpmath oracle: P(chi2_19 > 6) = 0.9979284552...
        assert report.p_value == pytest.approx(0.997928455202865, rel=1e-12)

    def test_log10_field_consistent(self):
        theta = np.full(19, 0.2)
        coeffs = CoefficientSet(BasisConfig((4, 3)), theta, 5000)
        report = deviance_test(coeffs)
        assert report.log10_p_value == pytest.approx(np.log10(report.p_value), rel=1e-6) \
            if report.p_value > 0 else report.log10_p_value < -300

    def test_pvalue_decreases_with_statistic(self):
        reports = []
        for scale in (0.01, 0.02, 0.03):
            theta = np.full(19, scale)
            coeffs = CoefficientSet(BasisConfig((4, 3)), theta, 2000)
            reports.append(deviance_test(coeffs))
        ps = [r.p_value for r in reports]
        assert ps[0] > ps[1] > ps[2]


class TestSubsetMask:
    def test_full_subset_is_everything(self):
        config = BasisConfig((3, 3))
        mask = subset_index_mask(config, [0, 1])
        assert mask.all()

    def test_single_coordinate_count(self):
        config = BasisConfig((3,) * 7)
        assert subset_index_mask(config, [4]).sum() == 3
        assert subset_index_mask(config, [4, 5]).sum() == 15
        assert subset_index_mask(config, [0, 1, 2]).sum() == 63
        assert subset_index_mask(config, [0, 1, 2, 3]).sum() == 255
        assert subset_index_mask(config, [6]).sum() == 3
        assert subset_index_mask(config, range(7)).sum() == 16383

    def test_disjoint_subsets_have_disjoint_masks(self):
        config = BasisConfig((2, 2, 2, 2))
        m1 = subset_index_mask(config, [0, 1])
        m2 = subset_index_mask(config, [2, 3])
        union = subset_index_mask(config, [0, 1, 2, 3])
        assert not np.any(m1 & m2)
        assert np.all(m1 <= union)
        assert np.all(m2 <= union)


class TestDiagnose:
    def test_full_vector_equals_deviance_test(self):
        rng = RngSeed(41).generator()
        model = seven_coordinate_chain()
        config = BasisConfig((2,) * 7)
        theta = rng.normal(0, 0.02, config.size)
        coeffs = CoefficientSet(config, theta, 2000)
        sel = select(coeffs, "bic")
        row = diagnose(coeffs, sel, model, range(7))
        report = deviance_test(coeffs, sel)
        assert row.statistic == pytest.approx(report.statistic, rel=1e-12)
        assert row.m_q == report.df
        assert row.p_value == pytest.approx(report.p_value, rel=1e-12)

    def test_marginality_violation_names_parents(self):
        model = seven_coordinate_chain()
        config = BasisConfig((2,) * 7)
        coeffs = CoefficientSet(config, np.zeros(config.size), 100)
        sel = select(coeffs, "bic")
        with pytest.raises(MarginalityError) as err:
            diagnose(coeffs, sel, model, ["X6"])
        assert set(err.value.missing) == {0, 1, 2}
        assert "X1" in str(err.value) and "X5" in str(err.value)
        with pytest.raises(MarginalityError):
            diagnose(coeffs, sel, model, ["X4"])

    def test_nested_subsets_have_nested_statistics(self):
        rng = RngSeed(42).generator()
        model = seven_coordinate_chain()
        config = BasisConfig((2,) * 7)
        coeffs = CoefficientSet(config, rng.normal(0, 0.05, config.size), 1500)
        sel = select(coeffs, "aic")
        small = diagnose(coeffs, sel, model, ["X3"])
        large = diagnose(coeffs, sel, model, ["X3", "X4"])
        assert small.statistic <= large.statistic + 1e-12

    def test_table_preserves_order_and_labels(self):
        rng = RngSeed(43).generator()
        model = seven_coordinate_chain()
        config = BasisConfig((2,) * 7)
        coeffs = CoefficientSet(config, rng.normal(0, 0.03, config.size), 800)
        sel = select(coeffs, "bic")
        subsets = [range(7), ["X1", "X2", "X5"], ["X3", "X4"], ["X7"]]
        rows = diagnostic_table(coeffs, sel, model, subsets)
        assert [r.m_q for r in rows] == [2186, 26, 8, 2]
        assert rows[1].labels == ("X1", "X2", "X5")
        assert rows[3].labels == ("X7",)
