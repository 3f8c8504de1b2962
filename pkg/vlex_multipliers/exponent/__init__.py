from vlex_multipliers.exponent.VariableExponent import (
    VariableExponent,
    ConstantExponent,
    PiecewiseLinearExponent,
    ClosedFormExponent,
    DerivedExponent,
    DerivedMap,
    ExponentKind,
    bounds,
    constant
)
from vlex_multipliers.exponent.LogHoelder import (
    LHCertificate,
    CertificateMethod,
    lh_certificate,
    certified
)
from vlex_multipliers.exponent.transforms import (
    conjugate,
    theta_range,
    admissible_tau,
    p_theta,
    theta_transform,
    theta_cloud,
    ThetaTransform,
    rp_range,
    in_rp_range,
    Decomposition,
    diening_decomposition,
    constant_decomposition,
    verify_decomposition
)

__all__ = [
    "VariableExponent", "ConstantExponent", "PiecewiseLinearExponent",
    "ClosedFormExponent", "DerivedExponent", "DerivedMap", "ExponentKind",
    "bounds", "constant", "LHCertificate", "CertificateMethod",
    "lh_certificate", "certified", "conjugate", "theta_range",
    "admissible_tau", "p_theta", "theta_transform", "theta_cloud",
    "ThetaTransform", "rp_range", "in_rp_range", "Decomposition",
    "diening_decomposition", "constant_decomposition", "verify_decomposition",
]
