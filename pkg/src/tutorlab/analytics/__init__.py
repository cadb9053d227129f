"""Learning analytics: opportunity tables, AFM fits, curves, and the census."""

from .afm import AfmConfig, AfmFit, AfmModel, afm_gradient, fit_afm, log_likelihood
from .census import DatasetRegistryEntry, census_filter, load_registry_tsv, semester
from .compare import ModelComparison, ModelScore, compare_kc_models
from .curves import CurvePoint, LearningCurve, aggregate_learning_curve, curve_slope, learning_curve
from .opportunity import OpportunityRow, OpportunityTable, build_opportunity_table

__all__ = [
    "AfmConfig",
    "AfmFit",
    "AfmModel",
    "CurvePoint",
    "DatasetRegistryEntry",
    "LearningCurve",
    "ModelComparison",
    "ModelScore",
    "OpportunityRow",
    "OpportunityTable",
    "afm_gradient",
    "aggregate_learning_curve",
    "build_opportunity_table",
    "census_filter",
    "compare_kc_models",
    "curve_slope",
    "fit_afm",
    "learning_curve",
    "load_registry_tsv",
    "log_likelihood",
    "semester",
]
