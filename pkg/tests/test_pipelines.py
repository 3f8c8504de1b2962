import json
import math

from dataclasses import replace

import numpy as np

from pytest import mark, raises

from vlex_multipliers.errors import (
    EtaOutOfRange,
    NoMultiplierBound,
    NonDecaying,
    NotDotContinuous,
    NotInWienerForm,
    PreconditionError,
    ResolutionExhausted,
    SpecParseError,
    ThetaOutOfRange
)
from vlex_multipliers.exponent import (
    ConstantExponent,
    VariableExponent,
    constant_decomposition,
    diening_decomposition
)
from vlex_multipliers.oracle import discrete_consistency
from vlex_multipliers.pipelines import (
    ApproximationCertificate,
    BoundFormula,
    ProbeLayout,
    certify_bar_continuous,
    certify_c0_cloud,
    certify_c0_variation,
    certify_dot_continuous,
    certify_finite_jumps,
    certify_pc_quantization,
    check_eta,
    interpolation_eta,
    jump_free,
    measure_mollification,
    multiplier_bound_theta,
    reduce_to_dot,
    remove_jumps,
    search_cutoff,
    wiener_rational_approx
)
from vlex_multipliers.symbols import (
    Symbol,
    SymbolClass,
    WienerForm,
    blaschke_rational,
    jump_killer_at,
    jump_killer_infinity,
    psi_n,
    unit_step
)

SMALL_LAYOUT = ProbeLayout(8.0, 256, 32, 16)
SAMPLES = np.linspace(-6.0, 6.0, 241)
P3 = ConstantExponent(3.0)


def lorentzian():
    density = Symbol.from_expression("exp(-abs(x))")
    return Symbol.from_expression("2/(1+x^2)", name="lorentzian", wiener=WienerForm(0.0, density))


def arctan():
    return Symbol.from_expression("atan(x)", name="atan")


def bump():
    return VariableExponent.from_spec(
        {"kind": "pwl", "knots": [[-1, 2], [0, 3], [1, 2]], "left_tail": 2, "right_tail": 2}
    )


def test_zero_symbol_has_a_trivial_certificate():
    certificate = certify_c0_cloud(Symbol.constant(0.0), P3, theta=0.25, epsilon=0.1, layout=SMALL_LAYOUT)
    assert certificate.certified_total == 0.0
    assert certificate.stage_1.parameter == 1
    assert certificate.stage_2.parameter == 1.0
    assert certificate.mode == "a"
    assert certificate.replay().ok


def test_cloud_needs_a_vanishing_symbol():
    with raises(NonDecaying):
        certify_c0_cloud(arctan(), P3, theta=0.25, epsilon=0.1, layout=SMALL_LAYOUT)


def test_cloud_needs_a_continuous_symbol():
    with raises(PreconditionError) as info:
        certify_c0_cloud(jump_killer_at(0.0, 0.0, 1.0), P3, theta=0.25, epsilon=0.1, layout=SMALL_LAYOUT)
    assert info.type is PreconditionError


@mark.parametrize("theta", (0.0, 0.7, -0.1))
def test_cloud_rejects_theta_outside_the_range(theta):
    with raises(ThetaOutOfRange):
        certify_c0_cloud(lorentzian(), P3, theta=theta, epsilon=0.1, layout=SMALL_LAYOUT)


@mark.parametrize("epsilon", (0.0, -1.0, math.inf))
def test_epsilon_must_be_positive_and_finite(epsilon):
    with raises(ValueError):
        certify_c0_cloud(lorentzian(), P3, theta=0.25, epsilon=epsilon, layout=SMALL_LAYOUT)


def test_uncertified_exponent_needs_tau():
    with raises(ThetaOutOfRange):
        certify_c0_cloud(lorentzian(), bump(), theta=0.25, epsilon=0.1, layout=SMALL_LAYOUT)


@mark.parametrize("p0 q eta".split(), ((2.5, 4.0, 0.6), (2.0, 4.0, 1.0), (1.5, 1.2, 0.5)))
def test_check_eta(p0, q, eta):
    assert abs(check_eta(p0, q) - eta) < 1e-12
    assert abs(interpolation_eta(p0, q) - eta) < 1e-12


@mark.parametrize("p0 q".split(), ((2.5, 2.0), (2.5, 2.5), (1.5, 1.8), (1.5, 1.0), (3.0, math.inf)))
def test_check_eta_rejects_inadmissible_q(p0, q):
    with raises(EtaOutOfRange):
        check_eta(p0, q)


def test_multiplier_bound_prefers_the_smaller_candidate():
    value, provenance = multiplier_bound_theta(lorentzian(), 2.0)
    assert provenance == "wiener"
    assert abs(value - 2.0) < 1e-9
    assert multiplier_bound_theta(lorentzian(), 2.0, supplied=1.5) == (1.5, "config-supplied")


def test_multiplier_bound_needs_some_candidate():
    oscillating = Symbol.from_expression("sin(x)")
    with raises(NoMultiplierBound):
        multiplier_bound_theta(oscillating, 2.0)
    assert multiplier_bound_theta(oscillating, 2.0, supplied=5.0) == (5.0, "config-supplied")


def test_variation_certificate():
    decomposition = diening_decomposition(bump(), 2.5, 0.2)
    certificate = certify_c0_variation(
        lorentzian(), bump(), decomposition, q=4.0, epsilon=2000.0, s_theta=2.0, layout=SMALL_LAYOUT
    )
    assert certificate.formula is BoundFormula.VARIATION
    assert certificate.mode == "b"
    assert abs(certificate.constants["eta"] - 0.6) < 1e-12
    assert certificate.constants["c_theta"] == 6.0
    assert certificate.certified_total < 2000.0
    assert certificate.replay().ok


def test_variation_certificate_needs_s_theta_for_variable_exponents():
    decomposition = diening_decomposition(bump(), 2.5, 0.2)
    with raises(NoMultiplierBound):
        certify_c0_variation(lorentzian(), bump(), decomposition, q=4.0, epsilon=2000.0, layout=SMALL_LAYOUT)


def test_variation_certificate_rejects_bad_q():
    decomposition = diening_decomposition(bump(), 2.5, 0.2)
    with raises(EtaOutOfRange):
        certify_c0_variation(
            lorentzian(), bump(), decomposition, q=2.0, epsilon=2000.0, s_theta=2.0, layout=SMALL_LAYOUT
        )


def test_quantization_certificate():
    b = unit_step(0.0, -1.0, 2.0)
    decomposition = constant_decomposition(3.0, theta=0.25, p0=2.0)
    certificate = certify_pc_quantization(b, P3, decomposition, q=4.0, epsilon=10.0, layout=SMALL_LAYOUT)
    assert certificate.formula is BoundFormula.QUANTIZATION
    assert certificate.mode == "quantization"
    assert certificate.stage_2 is None
    assert certificate.stage_1.parameter_name == "h_q"
    assert certificate.certified_total < 10.0
    assert np.array_equal(certificate.approximant.evaluate(SAMPLES), b.evaluate(SAMPLES))
    assert certificate.replay().ok


def test_reduce_constant_symbol():
    constant, rest = reduce_to_dot(Symbol.constant(7.0))
    assert constant == 7.0
    assert np.all(rest.evaluate(SAMPLES) == 0.0)


def test_reduce_shifted_lorentzian():
    constant, rest = reduce_to_dot(lorentzian() + 1.0)
    assert constant == 1.0
    assert np.max(np.abs(rest.evaluate(SAMPLES) - 2.0 / (1.0 + SAMPLES ** 2))) < 1e-12
    assert rest.belongs_to(SymbolClass.C0)


def test_reduce_needs_equal_limits():
    with raises(NotDotContinuous):
        reduce_to_dot(arctan())


@mark.parametrize("b", (unit_step(0.0, 0.0, 1.0), unit_step(-1.0, 0.0, 3.0) + unit_step(2.0, 0.0, -4.0)))
def test_remove_jumps_leaves_a_vanishing_continuous_rest(b):
    killers, rest = remove_jumps(b)
    assert all(abs(limit) < 1e-12 for limit in rest.limits)
    assert jump_free(rest)
    assert np.max(np.abs(killers.evaluate(SAMPLES) + rest.evaluate(SAMPLES) - b.evaluate(SAMPLES))) < 1e-12


def test_remove_jumps_of_a_continuous_symbol():
    a = arctan()
    killers, _ = remove_jumps(a)
    expected = jump_killer_infinity(a.limits)
    assert np.max(np.abs(killers.evaluate(SAMPLES) - expected.evaluate(SAMPLES))) < 1e-12


def test_rational_approximation_of_a_constant():
    approximation = wiener_rational_approx(Symbol.constant(2.0 - 1j), 4, layout=SMALL_LAYOUT)
    assert approximation.coefficients == {}
    assert approximation.sup_error == 0.0


@mark.parametrize("n", (1, 3))
def test_rational_approximation_reproduces_blaschke_factor(n):
    approximation = wiener_rational_approx(blaschke_rational(1), n, layout=SMALL_LAYOUT)
    assert list(approximation.coefficients) == [1]
    assert approximation.sup_error < 1e-12


def test_rational_approximation_of_lorentzian():
    approximation = wiener_rational_approx(lorentzian(), 8, layout=SMALL_LAYOUT)
    assert approximation.constant == 0.0
    assert approximation.sup_error < 1e-10
    assert approximation.symbol.wiener_form is not None


def test_rational_approximation_needs_a_wiener_form():
    with raises(NotInWienerForm):
        wiener_rational_approx(arctan(), 4)
    with raises(ValueError):
        wiener_rational_approx(lorentzian(), 0)


def test_dot_continuous_certificate():
    certificate = certify_dot_continuous(lorentzian() + 1.0, P3, epsilon=400.0, theta=0.25, layout=SMALL_LAYOUT)
    assert certificate.mode == "dot"
    assert certificate.metadata["method"] == "cloud"
    assert abs(certificate.approximant.evaluate(np.array([50.0]))[0] - 1.0) < 1e-12
    assert certificate.replay().ok


def test_bar_continuous_certificate():
    certificate = certify_bar_continuous(arctan(), P3, epsilon=400.0, theta=0.25, layout=SMALL_LAYOUT)
    assert certificate.mode == "bar"
    assert certificate.replay().ok


def test_bar_continuous_rejects_jumps():
    with raises(PreconditionError):
        certify_bar_continuous(unit_step(), P3, epsilon=400.0, theta=0.25, layout=SMALL_LAYOUT)


def test_finite_jumps_certificate():
    certificate = certify_finite_jumps(unit_step(), P3, epsilon=400.0, theta=0.25, layout=SMALL_LAYOUT)
    assert certificate.mode == "jumps"
    assert certificate.metadata["jumps"] == 1
    assert certificate.replay().ok


def test_unknown_method_is_rejected():
    with raises(ValueError):
        certify_finite_jumps(unit_step(), P3, epsilon=400.0, method="series", theta=0.25)


def test_tampered_certificate_fails_replay():
    certificate = certify_dot_continuous(lorentzian() + 1.0, P3, epsilon=400.0, theta=0.25, layout=SMALL_LAYOUT)
    constants = dict(certificate.constants)
    constants["c_theta"] += 1.0
    result = replace(certificate, constants=constants).replay()
    assert not result.ok
    assert result.issues
    assert not replace(certificate, certified_total=certificate.certified_total * 0.5).replay().ok


def test_certificate_survives_serialization():
    certificate = certify_c0_cloud(lorentzian(), P3, theta=0.25, epsilon=400.0, layout=SMALL_LAYOUT)
    restored = ApproximationCertificate.from_dict(json.loads(json.dumps(certificate.to_dict())))
    assert restored.formula is certificate.formula
    assert restored.certified_total == certificate.certified_total
    assert restored.replay().ok


def far_bump():
    return Symbol.from_expression("exp(-(x-5000)^2)", name="far_bump")


def test_far_bump_is_certified_with_its_sup():
    a = far_bump()
    certificate = certify_c0_cloud(a, P3, theta=0.25, epsilon=400.0, layout=SMALL_LAYOUT)
    assert certificate.stage_1.parameter == 1
    assert 0.999 < certificate.stage_1.sup.bound < 1.001
    assert certificate.certified_total > 0.0
    assert certificate.replay().ok
    honesty = certificate.honesty_check(a)
    assert honesty.measured > 0.999
    assert honesty.ok


def test_cutoff_search_passes_a_far_bump():
    n0, measured, bound = search_cutoff(far_bump(), lambda s: s, 0.5, SMALL_LAYOUT)
    assert n0 == 5001
    assert bound == measured.bound < 0.5


def test_cutoff_search_continues_past_a_plateau():
    narrow = Symbol.from_expression("exp(-100*(x-100.3)^2)", name="narrow")
    n0, measured, _ = search_cutoff(narrow, lambda s: s, 0.5, SMALL_LAYOUT)
    assert n0 == 101
    assert measured.bound < 1e-12


def test_cutoff_search_gives_up_after_its_doubling_budget():
    with raises(ResolutionExhausted):
        search_cutoff(far_bump(), lambda s: s, 0.5, SMALL_LAYOUT, max_doublings=3)


@mark.parametrize("delta", (1.0, 0.5, 0.0625))
def test_mollification_bound_covers_the_gaps(delta):
    b = lorentzian() * psi_n(2)
    mollified, measured = measure_mollification(b, delta, 4.0, SMALL_LAYOUT)
    x = np.linspace(-4.0, 4.0, 101)
    assert measured.value <= measured.bound
    assert float(np.max(np.abs(mollified.defect(x)))) <= measured.bound + 1e-12


def test_malformed_certificate_is_rejected():
    with raises(SpecParseError):
        ApproximationCertificate.from_dict({})


@mark.slow
@mark.parametrize("epsilon", (0.5, 0.1))
def test_lorentzian_certificate_is_honest(epsilon):
    a = lorentzian()
    certificate = certify_c0_cloud(a, P3, theta=0.25, epsilon=epsilon)
    assert certificate.certified_total < epsilon
    assert certificate.replay().ok
    assert certificate.honesty_check(a).ok
    row = discrete_consistency(a, certificate.approximant, certificate.certified_total, P3)
    assert row.passed


@mark.slow
def test_cutoff_grows_as_epsilon_shrinks():
    coarse = certify_c0_cloud(lorentzian(), P3, theta=0.25, epsilon=0.5)
    fine = certify_c0_cloud(lorentzian(), P3, theta=0.25, epsilon=0.1)
    assert fine.stage_1.parameter >= coarse.stage_1.parameter
