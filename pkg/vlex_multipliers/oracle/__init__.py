from vlex_multipliers.oracle.DiscreteSpace import DiscreteSpace, discrete_luxemburg, luxemburg_gradient
from vlex_multipliers.oracle.opnorm import OpnormResult, RatioAscent, discrete_opnorm
from vlex_multipliers.oracle.suite import (
    Check,
    SuiteRow,
    SuiteReport,
    SuiteConfig,
    SuiteKeys,
    InterpolationResult,
    DftModel,
    check_riesz_thorin,
    interpolation_constant,
    run_riesz_thorin_corpus,
    run_property_suite,
    discrete_consistency,
    default_symbols,
    default_exponents,
    default_s_bounds,
    case_ids
)

__all__ = [
    "DiscreteSpace", "discrete_luxemburg", "luxemburg_gradient", "OpnormResult",
    "RatioAscent", "discrete_opnorm", "Check", "SuiteRow", "SuiteReport",
    "SuiteConfig", "SuiteKeys", "InterpolationResult", "DftModel",
    "check_riesz_thorin", "interpolation_constant", "run_riesz_thorin_corpus",
    "run_property_suite", "discrete_consistency", "default_symbols",
    "default_exponents", "default_s_bounds", "case_ids",
]
