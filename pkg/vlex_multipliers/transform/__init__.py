from vlex_multipliers.transform.fourier import (
    fourier,
    inverse_fourier,
    apply_multiplier,
    sample_symbol,
    cauchy_symbol,
    cauchy_singular,
    principal_value_oracle
)
from vlex_multipliers.transform.maximal import maximal_function
from vlex_multipliers.transform.WitnessSearch import (
    SearchConfig,
    Witness,
    LowerBound,
    WitnessSearch,
    parameter_space,
    opnorm_lower
)
from vlex_multipliers.transform.estimates import (
    NormEstimate,
    UpperProvenance,
    SBoundSource,
    default_s_bound,
    resolve_s_bound,
    s_bound_source,
    stechkin_bound,
    multiplier_norm_bounds
)

__all__ = [
    "fourier", "inverse_fourier", "apply_multiplier", "sample_symbol",
    "cauchy_symbol", "cauchy_singular", "principal_value_oracle",
    "maximal_function", "SearchConfig", "Witness", "LowerBound",
    "WitnessSearch", "parameter_space", "opnorm_lower", "NormEstimate",
    "UpperProvenance", "SBoundSource", "default_s_bound", "resolve_s_bound",
    "s_bound_source", "stechkin_bound",
    "multiplier_norm_bounds",
]
