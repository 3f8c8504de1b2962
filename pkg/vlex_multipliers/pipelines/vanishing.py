"""Certified approximation of symbols vanishing at infinity by compactly
supported smooth symbols, and of piecewise constant symbols by quantized
ones.

Stage 1 cuts a off with psi_n and searches the smallest n whose bound term
is below epsilon/2 (doubling, then bisection). Stage 2 mollifies
b = a psi_n0 and halves delta from 1 until its bound term is below
epsilon/2.
"""
import math

from typing import Callable, Dict, Optional, Tuple

import numpy as np

from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import (
    EtaOutOfRange,
    NoMultiplierBound,
    NonDecaying,
    NotEnclosable,
    NotInWienerForm,
    PreconditionError,
    ResolutionExhausted,
    ThetaOutOfRange,
    UnboundedVariation
)
from vlex_multipliers.exponent.VariableExponent import VariableExponent
from vlex_multipliers.exponent.transforms import (
    Decomposition,
    admissible_tau,
    p_theta,
    verify_decomposition
)
from vlex_multipliers.pipelines.ApproximationCertificate import (
    ApproximationCertificate,
    BoundFormula,
    CertificateStage,
    CONSTANT_A_THETA,
    CONSTANT_C_Q,
    CONSTANT_C_THETA,
    CONSTANT_ETA,
    CONSTANT_P0,
    CONSTANT_Q,
    CONSTANT_S_Q,
    CONSTANT_S_THETA,
    CONSTANT_VNORM,
    cloud_bounds,
    interpolation_eta,
    quantization_bound,
    variation_bounds
)
from vlex_multipliers.pipelines.probes import ProbeLayout, SupMeasurement, cutoff_radius, measure_sup
from vlex_multipliers.symbols.MollifiedSymbol import MollifiedSymbol, mollifier_moment
from vlex_multipliers.symbols.Symbol import SPEC_TOLERANCE, Symbol
from vlex_multipliers.symbols.constructions import pc0_quantize, psi_n
from vlex_multipliers.symbols.enclosure import derivative_bounds, symbol_sup, tail_sup
from vlex_multipliers.symbols.norms import symbol_wiener_norm, total_variation, vnorm
from vlex_multipliers.transform.estimates import default_s_bound, resolve_s_bound
from vlex_multipliers.utils import get_logger

StageBound = Callable[[float], float]

INITIAL_DELTA = 1.0
INITIAL_STEP = 1.0


def _check_vanishing(a: Symbol):
    left, right = a.limits
    if left is None or right is None or abs(left) > SPEC_TOLERANCE or abs(right) > SPEC_TOLERANCE:
        raise NonDecaying(f"Symbol {a.name!r} has limits {left}, {right} at -inf, +inf, not zero")
    if a.jumps:
        raise PreconditionError(
            f"Symbol {a.name!r} jumps at {[j.location for j in a.jumps]}; remove the jumps first"
        )


def _cutoff_error(a: Symbol, n: int) -> Callable[[np.ndarray], np.ndarray]:
    def error(x):
        psi = np.clip(n + 1.0 - np.abs(x), 0.0, 1.0)
        return a.evaluate(x) * (1.0 - psi)
    return error


def measure_cutoff(a: Symbol, n: int, layout: ProbeLayout) -> SupMeasurement:
    """||a - a psi_n||_inf. The value is sampled on probes up to radius
    1024 (n + 1); the bound is an enclosure of sup |a| over |x| >= n, which
    dominates the error everywhere.

    :raises NotEnclosable: a admits no finite enclosure beyond n
    """
    breakpoints = list(a.breakpoints) + [-n - 1.0, -float(n), float(n), n + 1.0]
    nodes = layout.nodes(cutoff_radius(n), breakpoints)
    sampled = measure_sup(_cutoff_error(a, n), nodes)
    tail = tail_sup(a, float(n))
    return SupMeasurement.enclosed(sampled.value, tail.bound, sampled.nodes)


def search_cutoff(
        a: Symbol,
        stage_bound: StageBound,
        target: float,
        layout: ProbeLayout,
        max_doublings: Optional[int] = None
    ) -> Tuple[int, SupMeasurement, float]:
    """Smallest n with stage_bound(||a - a psi_n||) < target. Keeps doubling
    through plateaus, so a bump far out only delays the cutoff.

    :raises ResolutionExhausted: no n up to 2^max_doublings passes
    """
    logger = get_logger(__name__)
    if max_doublings is None:
        max_doublings = get_defaults().max_doublings

    n = 1
    measured = measure_cutoff(a, n, layout)
    bound = stage_bound(measured.bound)
    logger.debug(f"Cutoff n=1: sup {measured.bound:.6g}, bound {bound:.6g}")
    if bound < target:
        return n, measured, bound

    for _ in range(max_doublings):
        failing = n
        n *= 2
        measured = measure_cutoff(a, n, layout)
        bound = stage_bound(measured.bound)
        logger.debug(f"Cutoff n={n}: sup {measured.bound:.6g}, bound {bound:.6g}")
        if bound < target:
            break
    else:
        raise ResolutionExhausted(
            f"No cutoff up to n={n} brings the bound of {a.name!r} below {target:.6g} "
            f"(sup {measured.bound:.6g} beyond n)"
        )

    low, high = failing, n
    best, best_bound = measured, bound
    while high - low > 1:
        middle = (low + high) // 2
        trial = measure_cutoff(a, middle, layout)
        trial_bound = stage_bound(trial.bound)
        logger.debug(f"Cutoff bisection n={middle}: bound {trial_bound:.6g}")
        if trial_bound < target:
            high, best, best_bound = middle, trial, trial_bound
        else:
            low = middle
    return high, best, best_bound


def _crosses(points: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return np.searchsorted(points, upper, side="right") > np.searchsorted(points, lower, side="left")


def _gap_bounds(b: Symbol, delta: float, nodes: np.ndarray, defects: np.ndarray) -> np.ndarray:
    """Bounds of |b * phi_delta - b| on each probe gap [x_i, x_(i+1)] of a
    continuous b.

    The defect D is Lipschitz with constant L_i on the gap, so
    |D| <= (D_i + D_(i+1) + gap L_i) / 2 there. L_i is 2 sup |b'| over the
    window [x_i - delta, x_(i+1) + delta], or delta m1 sup |b''| and
    delta^2 m2 / 2 sup |b'''| when the window holds no breakpoint. Every
    point also has |D| <= delta m1 sup |b'| over its window.
    """
    lower, upper = nodes[:-1] - delta, nodes[1:] + delta
    first = derivative_bounds(b, 1, lower, upper)
    slope = 2.0 * first
    smooth = ~_crosses(b.breakpoints, lower, upper)
    if np.any(smooth):
        second = derivative_bounds(b, 2, lower[smooth], upper[smooth])
        third = derivative_bounds(b, 3, lower[smooth], upper[smooth])
        slope[smooth] = np.minimum(
            slope[smooth],
            np.minimum(delta * mollifier_moment(1) * second, 0.5 * delta ** 2 * mollifier_moment(2) * third)
        )
    interpolated = 0.5 * (defects[:-1] + defects[1:] + np.diff(nodes) * slope)
    return np.minimum(interpolated, delta * mollifier_moment(1) * first)


def measure_mollification(b: Symbol, delta: float, radius: float, layout: ProbeLayout) -> Tuple[MollifiedSymbol, SupMeasurement]:
    """||b * phi_delta - b||_inf of a continuous b supported in
    [-radius + delta, radius - delta]. The value is the largest defect bound
    at the probes; the bound also covers the gaps between them.

    :raises NotEnclosable: a derivative of b admits no finite enclosure
    """
    if b.jumps:
        raise PreconditionError(f"Symbol {b.name!r} jumps; mollification bounds need a continuous symbol")
    mollified = MollifiedSymbol(b, delta)
    nodes = layout.nodes(radius, b.breakpoints, (1.0, 2.0 * delta))
    defects = mollified.defect_bound(nodes)
    if not np.all(np.isfinite(defects)):
        raise ResolutionExhausted(f"Defect of {b.name!r} at delta={delta:g} is not finite on the probes")
    value = float(np.max(defects)) if len(defects) else 0.0
    bound = float(np.max(_gap_bounds(b, delta, nodes, defects))) if len(nodes) > 1 else value
    if not math.isfinite(bound):
        raise NotEnclosable(f"Derivatives of {b.name!r} admit no finite enclosure between the probes")
    return mollified, SupMeasurement.enclosed(value, bound, len(nodes))


def search_width(
        b: Symbol,
        stage_bound: StageBound,
        target: float,
        radius: float,
        layout: ProbeLayout,
        min_delta: Optional[float] = None
    ) -> Tuple[MollifiedSymbol, SupMeasurement, float]:
    """Largest delta = 2^-k with stage_bound(||b * phi_delta - b||) < target.

    :raises ResolutionExhausted: delta falls below the configured minimum
    """
    if min_delta is None:
        min_delta = get_defaults().min_delta
    delta = INITIAL_DELTA
    while delta >= min_delta:
        mollified, measured = measure_mollification(b, delta, radius, layout)
        bound = stage_bound(measured.bound)
        get_logger(__name__).debug(f"Mollification delta={delta:.6g}: sup {measured.bound:.6g}, bound {bound:.6g}")
        if bound < target:
            return mollified, measured, bound
        delta /= 2.0
    raise ResolutionExhausted(
        f"Mollification of {b.name!r} needs delta below {min_delta:g} to reach {target:.6g}"
    )


def _trivial_certificate(
        a: Symbol,
        mode: str,
        epsilon: float,
        theta: float,
        formula: BoundFormula,
        constants: Dict[str, float],
        layout: ProbeLayout,
        metadata: Dict
    ) -> ApproximationCertificate:
    zero = SupMeasurement.exact(0.0)
    return ApproximationCertificate(
        target_id=a.name,
        target=a.spec(),
        mode=mode,
        epsilon=epsilon,
        theta=theta,
        formula=formula,
        constants=constants,
        stage_1=CertificateStage("n0", 1, zero, 0.0),
        stage_2=CertificateStage("delta0", INITIAL_DELTA, zero, 0.0),
        certified_total=0.0,
        approximant=MollifiedSymbol(a * psi_n(1), INITIAL_DELTA),
        layout=layout,
        radius=cutoff_radius(1),
        metadata=metadata
    )


def _two_stage(
        a: Symbol,
        mode: str,
        epsilon: float,
        theta: float,
        formula: BoundFormula,
        constants: Dict[str, float],
        bounds: Callable[[float, float], Tuple[float, float]],
        layout: Optional[ProbeLayout],
        metadata: Dict
    ) -> ApproximationCertificate:
    logger = get_logger(__name__)
    if layout is None:
        layout = ProbeLayout.from_defaults()
    if symbol_sup(a, -math.inf, math.inf).bound == 0.0:
        return _trivial_certificate(a, mode, epsilon, theta, formula, constants, layout, metadata)

    n0, sup1, bound1 = search_cutoff(a, lambda s: bounds(s, 0.0)[0], epsilon / 2.0, layout)
    b = (a * psi_n(n0)).renamed(f"{a.name}*psi_{n0}")
    approximant, sup2, bound2 = search_width(
        b, lambda s: bounds(0.0, s)[1], epsilon / 2.0, n0 + 2.0, layout
    )
    total = bound1 + bound2
    logger.debug(
        f"Certificate for {a.name!r} ({formula.value}): n0={n0}, delta0={approximant.delta:.6g}, "
        f"total {total:.6g} < {epsilon}"
    )
    return ApproximationCertificate(
        target_id=a.name,
        target=a.spec(),
        mode=mode,
        epsilon=epsilon,
        theta=theta,
        formula=formula,
        constants=constants,
        stage_1=CertificateStage("n0", n0, sup1, bound1),
        stage_2=CertificateStage("delta0", approximant.delta, sup2, bound2),
        certified_total=total,
        approximant=approximant,
        layout=layout,
        radius=cutoff_radius(n0),
        metadata=metadata
    )


def _check_epsilon(epsilon: float):
    if not epsilon > 0 or math.isinf(epsilon):
        raise ValueError(f"epsilon must be positive and finite, got {epsilon}")


def multiplier_bound_theta(
        a: Symbol,
        s_theta: float,
        supplied: Optional[float] = None
    ) -> Tuple[float, str]:
    """Upper bound A_theta of ||a||_{M_{p_theta}}: the smaller of the
    Stechkin bound, the Wiener norm and a supplied value.

    :raises NoMultiplierBound: none of them is available
    """
    candidates = []
    try:
        candidates.append((s_theta * vnorm(a), "stechkin"))
    except UnboundedVariation:
        pass
    try:
        candidates.append((symbol_wiener_norm(a), "wiener"))
    except NotInWienerForm:
        pass
    if supplied is not None:
        candidates.append((float(supplied), "config-supplied"))
    if not candidates:
        raise NoMultiplierBound(
            f"Symbol {a.name!r} has unbounded variation, no Wiener form and no supplied bound"
        )
    return min(candidates, key=lambda item: item[0])


def certify_c0_cloud(
        a: Symbol,
        p: VariableExponent,
        theta: float,
        epsilon: float,
        s_bound_theta: Optional[float] = None,
        a_theta: Optional[float] = None,
        tau: Optional[float] = None,
        layout: Optional[ProbeLayout] = None
    ) -> ApproximationCertificate:
    """Certificate through the interpolation cloud of p.

    :param a: symbol vanishing at +-inf
    :param p: exponent
    :param theta: interpolation parameter, 0 < theta < tau_p
    :param epsilon: accuracy
    :param s_bound_theta: bound for the norm of S on L^{p_theta(.)};
        the classical constant for constant exponents
    :param a_theta: supplied bound of ||a||_{M_{p_theta}}
    :param tau: tau_p for exponents without a log-Hoelder certificate
    :param layout: probe layout, defaults to the configured one
    :raises ThetaOutOfRange: theta not in (0, tau_p)
    :raises NoMultiplierBound: no A_theta or no bound for S
    :raises NonDecaying: a does not vanish at infinity
    :return: certificate with formula id ``cloud``
    """
    _check_epsilon(epsilon)
    resolved_tau = admissible_tau(p, tau)
    if not 0.0 < theta < resolved_tau:
        raise ThetaOutOfRange(f"theta = {theta} must satisfy 0 < theta < tau = {resolved_tau}")
    exponent_theta = p_theta(p, theta)
    s_theta = resolve_s_bound(exponent_theta, s_bound_theta)
    if s_theta is None:
        raise NoMultiplierBound(f"No bound for S on L^p_theta for variable {exponent_theta.spec()}; supply s_theta")
    _check_vanishing(a)

    bound_a, provenance = multiplier_bound_theta(a, s_theta, a_theta)
    constants = {
        CONSTANT_S_THETA: s_theta,
        CONSTANT_C_THETA: 3.0 * s_theta,
        CONSTANT_A_THETA: bound_a,
    }
    metadata = {
        "p": p.spec(),
        "p_theta": exponent_theta.spec(),
        "tau": resolved_tau,
        "a_theta_provenance": provenance,
    }
    return _two_stage(
        a, "a", epsilon, theta, BoundFormula.CLOUD, constants,
        lambda s1, s2: cloud_bounds(constants, theta, s1, s2),
        layout, metadata
    )


def check_eta(p0: float, q: float) -> float:
    """eta for the auxiliary exponent q: q > p0 when p0 >= 2, 1 < q < p0
    otherwise, and eta in (0, 1].

    :raises EtaOutOfRange: q violates the rule or eta leaves (0, 1]
    """
    if not 1.0 < q < math.inf:
        raise EtaOutOfRange(f"q = {q} must lie in (1, inf)")
    if p0 >= 2.0 and not q > p0:
        raise EtaOutOfRange(f"q = {q} must exceed p0 = {p0} when p0 >= 2")
    if p0 < 2.0 and not q < p0:
        raise EtaOutOfRange(f"q = {q} must lie below p0 = {p0} when p0 < 2")
    eta = interpolation_eta(p0, q)
    if not (math.isfinite(eta) and 0.0 < eta <= 1.0):
        raise EtaOutOfRange(f"eta = {eta} for p0 = {p0}, q = {q} is outside (0, 1]")
    return eta


def _variation_constants(
        a: Symbol,
        p: VariableExponent,
        decomposition: Decomposition,
        q: float,
        s_theta: Optional[float],
        s_q: Optional[float],
        layout: ProbeLayout
    ) -> Dict[str, float]:
    verify_decomposition(p, decomposition, layout.nodes(layout.core_half_width))
    eta = check_eta(decomposition.p0, q)
    s_theta = resolve_s_bound(decomposition.p_theta, s_theta)
    if s_theta is None:
        raise NoMultiplierBound("No bound for S on L^p_theta of a variable decomposition; supply s_theta")
    if s_q is None:
        s_q = default_s_bound(q)
    try:
        variation_norm = vnorm(a)
    except UnboundedVariation as e:
        raise NoMultiplierBound(f"Symbol {a.name!r} has unbounded variation") from e
    return {
        CONSTANT_S_THETA: float(s_theta),
        CONSTANT_C_THETA: 3.0 * s_theta,
        CONSTANT_S_Q: float(s_q),
        CONSTANT_C_Q: 3.0 * s_q,
        CONSTANT_ETA: eta,
        CONSTANT_P0: float(decomposition.p0),
        CONSTANT_Q: float(q),
        CONSTANT_VNORM: variation_norm,
    }


def certify_c0_variation(
        a: Symbol,
        p: VariableExponent,
        decomposition: Decomposition,
        q: float,
        epsilon: float,
        s_theta: Optional[float] = None,
        s_q: Optional[float] = None,
        layout: Optional[ProbeLayout] = None
    ) -> ApproximationCertificate:
    """Certificate through a decomposition 1/p = theta/p0 + (1-theta)/p_theta
    and the variation norm of a.

    :raises BadDecomposition: the decomposition identity fails
    :raises EtaOutOfRange: q is not admissible for p0
    :raises NoMultiplierBound: unbounded variation or no bound for S
    :raises NonDecaying: a does not vanish at infinity
    :return: certificate with formula id ``variation``
    """
    _check_epsilon(epsilon)
    if layout is None:
        layout = ProbeLayout.from_defaults()
    constants = _variation_constants(a, p, decomposition, q, s_theta, s_q, layout)
    _check_vanishing(a)
    theta = decomposition.theta
    metadata = {"p": p.spec(), "decomposition": decomposition.to_dict()}
    return _two_stage(
        a, "b", epsilon, theta, BoundFormula.VARIATION, constants,
        lambda s1, s2: variation_bounds(constants, theta, s1, s2),
        layout, metadata
    )


def certify_pc_quantization(
        b: Symbol,
        p: VariableExponent,
        decomposition: Decomposition,
        q: float,
        epsilon: float,
        s_theta: Optional[float] = None,
        s_q: Optional[float] = None,
        layout: Optional[ProbeLayout] = None
    ) -> ApproximationCertificate:
    """Replaces b by its quantization b_n onto the lattice h Z (per real and
    imaginary part), halving h until the quantization bound is below epsilon.

    :raises RuntimeError: the quantized symbol gains more than 2h of variation
    :raises ResolutionExhausted: h falls below the configured minimum
    :return: single-stage certificate with formula id ``quantization``
    """
    _check_epsilon(epsilon)
    logger = get_logger(__name__)
    if layout is None:
        layout = ProbeLayout.from_defaults()
    constants = _variation_constants(b, p, decomposition, q, s_theta, s_q, layout)
    theta = decomposition.theta
    min_step = get_defaults().min_delta
    divisor = 2.0 if b.is_real else math.sqrt(2.0)

    step = INITIAL_STEP
    while True:
        if step < min_step:
            raise ResolutionExhausted(f"Quantization of {b.name!r} needs a step below {min_step:g}")
        error = step / divisor
        bound = quantization_bound(constants, theta, error)
        logger.debug(f"Quantization step {step:.6g}: bound {bound:.6g}")
        if bound < epsilon:
            break
        step /= 2.0

    quantized = pc0_quantize(b, step)
    gained = total_variation(quantized) - total_variation(b)
    if gained > 2.0 * step + SPEC_TOLERANCE:
        raise RuntimeError(f"Quantization of {b.name!r} gained variation {gained} above 2h = {2.0 * step}")
    radius = max([layout.core_half_width] + [abs(x) + 2.0 for x in b.breakpoints])
    return ApproximationCertificate(
        target_id=b.name,
        target=b.spec(),
        mode="quantization",
        epsilon=epsilon,
        theta=theta,
        formula=BoundFormula.QUANTIZATION,
        constants=constants,
        stage_1=CertificateStage("h_q", step, SupMeasurement.exact(error), bound),
        stage_2=None,
        certified_total=bound,
        approximant=quantized,
        layout=layout,
        radius=radius,
        metadata={"p": p.spec(), "decomposition": decomposition.to_dict(), "pieces": len(quantized.pieces)}
    )
