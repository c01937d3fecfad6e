"""Smooth goodness-of-fit for multivariate distributions.

Estimate how a sample deviates from a fully specified multivariate model:
transform the data to the unit cube through the model's conditional chain,
expand the transformed density in an orthonormal tensor-polynomial basis,
test the expansion coefficients with selection-robust deviance bounds,
localize deviations with simultaneous confidence bands, and decompose
mismodeling across coordinate subsets.
"""

__version__ = "0.1.0"

from .basis import BasisConfig, DiscreteMarginal, enumerate_K, lp_discrete_basis
from .bands import (
    FieldGrid,
    LKCEstimate,
    band_grid,
    empirical_ec,
    estimate_lkc,
    mc_sup_quantile,
    se0,
    solve_c_alpha,
)
from .errors import (
    BracketError,
    DomainError,
    MarginalityError,
    MissingCovarianceError,
    RankError,
    SupportError,
)
from .estimate import (
    CoefficientSet,
    ComparisonDensity,
    eval_d,
    eval_f,
    fit,
    isb_oracle,
    variance_d,
)
from .harness import (
    MixtureModel,
    SeriesTiltModel,
    StudyConfig,
    StudyResult,
    catalog,
    catalog_names,
    diagnostic_study,
    type1_power_study,
)
from .infer import DevianceReport, DiagnosticRow, deviance_test, diagnose, diagnostic_table
from .model import ModelSpec, USample, model_from_json, model_to_json
from .numeric import QuadratureRule, RngSeed, chi2_logsf, chi2_sf, find_root, gauss_legendre
from .select import SelectionResult, select

__all__ = [
    "__version__",
    "BasisConfig",
    "DiscreteMarginal",
    "enumerate_K",
    "lp_discrete_basis",
    "FieldGrid",
    "LKCEstimate",
    "band_grid",
    "empirical_ec",
    "estimate_lkc",
    "mc_sup_quantile",
    "se0",
    "solve_c_alpha",
    "BracketError",
    "DomainError",
    "MarginalityError",
    "MissingCovarianceError",
    "RankError",
    "SupportError",
    "CoefficientSet",
    "ComparisonDensity",
    "eval_d",
    "eval_f",
    "fit",
    "isb_oracle",
    "variance_d",
    "MixtureModel",
    "SeriesTiltModel",
    "StudyConfig",
    "StudyResult",
    "catalog",
    "catalog_names",
    "diagnostic_study",
    "type1_power_study",
    "DevianceReport",
    "DiagnosticRow",
    "deviance_test",
    "diagnose",
    "diagnostic_table",
    "ModelSpec",
    "USample",
    "model_from_json",
    "model_to_json",
    "QuadratureRule",
    "RngSeed",
    "chi2_logsf",
    "chi2_sf",
    "find_root",
    "gauss_legendre",
    "SelectionResult",
    "select",
]
