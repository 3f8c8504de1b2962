from vlex_multipliers.pipelines.probes import ProbeLayout, SupMeasurement, measure_sup, cutoff_radius
from vlex_multipliers.pipelines.ApproximationCertificate import (
    ApproximationCertificate,
    BoundFormula,
    CertificateStage,
    ReplayResult,
    HonestyResult,
    interpolation_eta,
    cloud_bounds,
    variation_bounds,
    quantization_bound
)
from vlex_multipliers.pipelines.vanishing import (
    certify_c0_cloud,
    certify_c0_variation,
    certify_pc_quantization,
    check_eta,
    measure_cutoff,
    measure_mollification,
    multiplier_bound_theta,
    search_cutoff,
    search_width
)
from vlex_multipliers.pipelines.reductions import (
    RationalApproximation,
    reduce_to_dot,
    remove_jumps,
    wiener_rational_approx,
    certify_dot_continuous,
    certify_bar_continuous,
    certify_finite_jumps,
    jump_free
)

__all__ = [
    "ProbeLayout", "SupMeasurement", "measure_sup", "cutoff_radius",
    "ApproximationCertificate", "BoundFormula", "CertificateStage",
    "ReplayResult", "HonestyResult", "interpolation_eta", "cloud_bounds",
    "variation_bounds", "quantization_bound", "certify_c0_cloud",
    "certify_c0_variation", "certify_pc_quantization", "check_eta",
    "measure_cutoff", "measure_mollification", "multiplier_bound_theta",
    "search_cutoff", "search_width",
    "RationalApproximation", "reduce_to_dot", "remove_jumps",
    "wiener_rational_approx", "certify_dot_continuous",
    "certify_bar_continuous", "certify_finite_jumps", "jump_free",
]
