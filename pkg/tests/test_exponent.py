import math

import numpy as np

from pytest import mark, raises
from hypothesis import given, settings
from hypothesis.strategies import floats, integers

from vlex_multipliers.errors import (
    BadDecomposition,
    InvalidExponent,
    NotLogHoelder,
    SpecParseError,
    ThetaOutOfRange
)
from vlex_multipliers.exponent import (
    CertificateMethod,
    ConstantExponent,
    DerivedExponent,
    PiecewiseLinearExponent,
    VariableExponent,
    admissible_tau,
    certified,
    conjugate,
    constant_decomposition,
    diening_decomposition,
    in_rp_range,
    lh_certificate,
    p_theta,
    rp_range,
    theta_cloud,
    theta_range,
    verify_decomposition
)

SAMPLES = np.linspace(-10.0, 10.0, 401)


def pwl(knots, left, right):
    return VariableExponent.from_spec({"kind": "pwl", "knots": knots, "left_tail": left, "right_tail": right})


def bump():
    return pwl([[-1, 2], [0, 3], [1, 2]], 2, 2)


@mark.parametrize("spec expected".split(), (
    ({"kind": "constant", "value": 2.0}, (2.0, 2.0)),
    ({"kind": "pwl", "knots": [[-1, 3], [1, 1.5]], "left_tail": 3, "right_tail": 1.5}, (1.5, 3.0)),
))
def test_bounds_of_simple_exponents(spec, expected):
    p = VariableExponent.from_spec(spec)
    assert p.bounds == expected
    values = p(SAMPLES)
    assert np.all(values >= p.p_minus) and np.all(values <= p.p_plus)


def test_bounds_of_closed_form_exponent():
    p = VariableExponent.from_spec({"kind": "closed_form", "expr": "2+1/(1+x^2)"})
    lo, hi = p.bounds
    assert abs(lo - 2.0) < 1e-9
    assert abs(hi - 3.0) < 1e-9


@mark.parametrize("expr lower upper".split(), (
    ("2+exp(-(x-50)^2)", 2.0, 3.0),
    ("3-exp(-(x+50)^2)", 2.0, 3.0),
    ("2+exp(-(x-1000.5)^2)/2", 2.0, 2.5),
))
def test_closed_form_bounds_see_peaks_between_far_nodes(expr, lower, upper):
    p = VariableExponent.from_spec({"kind": "closed_form", "expr": expr, "domain_halfwidth": 20})
    lo, hi = p.bounds
    assert abs(lo - lower) < 1e-6
    assert abs(hi - upper) < 1e-6


def test_hidden_dip_below_one_is_rejected():
    with raises(InvalidExponent):
        VariableExponent.from_spec({"kind": "closed_form", "expr": "2-3/2*exp(-(x-60)^2)", "domain_halfwidth": 20})


@mark.parametrize("spec", (
    {"kind": "constant", "value": 1.0},
    {"kind": "constant", "value": 0.5},
    {"kind": "pwl", "knots": [[0, 0.9]], "left_tail": 2, "right_tail": 2},
))
def test_exponents_at_or_below_one_are_rejected(spec):
    with raises(InvalidExponent):
        VariableExponent.from_spec(spec)


@mark.parametrize("spec", (
    {"value": 2.0},
    {"kind": "spline", "value": 2.0},
    {"kind": "constant", "value": 2.0, "colour": "red"},
    {"kind": "pwl", "knots": [[1, 2], [0, 3]], "left_tail": 2, "right_tail": 2},
))
def test_malformed_specs_are_parse_errors(spec):
    with raises(SpecParseError):
        VariableExponent.from_spec(spec)


@mark.parametrize("value conjugated".split(), ((3.0, 1.5), (2.0, 2.0), (1.5, 3.0)))
def test_conjugate_of_constant(value, conjugated):
    assert conjugate(ConstantExponent(value)).value == conjugated


def test_conjugate_pointwise_and_involutive():
    p = pwl([[-2, 1.5], [2, 3]], 1.5, 3)
    q = conjugate(p)
    assert abs(float(q(np.array([-2.0]))[0]) - 3.0) < 1e-12
    assert conjugate(q) is p
    back = 1.0 / (1.0 - 1.0 / q(SAMPLES))
    assert np.max(np.abs(back - p(SAMPLES))) < 1e-12


def test_constant_certificate():
    certificate = lh_certificate(ConstantExponent(2.5))
    assert (certificate.c0, certificate.c_infinity, certificate.p_infinity) == (0.0, 0.0, 2.5)
    assert certificate.certified


def test_piecewise_linear_certificate_matches_maximization():
    certificate = lh_certificate(bump())
    t = np.geomspace(1e-6, 1e6, 200001)
    oracle = float(np.max(np.minimum(t, 1.0) * np.log(math.e + 1.0 / t)))
    assert certificate.method is CertificateMethod.ANALYTIC
    assert certificate.p_infinity == 2.0
    assert abs(certificate.c0 - oracle) < 1e-6
    assert abs(certificate.c0 - math.log(math.e + 1.0)) < 1e-12


def test_different_tails_are_not_log_hoelder():
    with raises(NotLogHoelder):
        lh_certificate(pwl([[0, 2]], 2, 3))


def test_closed_form_certificate_is_only_an_estimate():
    p = VariableExponent.from_spec({"kind": "closed_form", "expr": "2+1/(1+x^2)"})
    certificate = lh_certificate(p)
    assert certificate.method is CertificateMethod.SAMPLED
    assert not certificate.certified
    with raises(ThetaOutOfRange):
        admissible_tau(certified(p))
    assert admissible_tau(p, 0.3) == 0.3


@mark.parametrize("p expected".split(), ((4.0, 0.5), (2.0, 1.0)))
def test_theta_range_of_constants(p, expected):
    assert theta_range(ConstantExponent(p)) == expected


def test_theta_range_of_variable_exponent():
    assert abs(theta_range(pwl([[-1, 1.5], [1, 3]], 1.5, 3)) - 2.0 / 3.0) < 1e-15


def test_p_theta_of_constants():
    assert abs(p_theta(ConstantExponent(4.0), 0.25).value - 6.0) < 1e-12
    for theta in (0.1, 0.5, 0.9):
        assert abs(p_theta(ConstantExponent(2.0), theta).value - 2.0) < 1e-12


def test_p_theta_pointwise_value():
    p = pwl([[0, 3]], 3, 3)
    value = float(p_theta(p, 0.2)(np.array([0.0]))[0])
    assert abs(value - 4.8 / 1.4) < 1e-12


@mark.parametrize("theta", (0.0, -0.1, 0.5, 0.7))
def test_p_theta_rejects_theta_outside_range(theta):
    with raises(ThetaOutOfRange):
        p_theta(ConstantExponent(4.0), theta)


@settings(max_examples=50, deadline=None)
@given(floats(min_value=0.01, max_value=0.99))
def test_p_theta_round_trip(fraction):
    p = bump()
    theta = fraction * theta_range(p)
    transformed = p_theta(p, theta)
    defect = 1.0 / p(SAMPLES) - theta / 2.0 - (1.0 - theta) / transformed(SAMPLES)
    assert np.max(np.abs(defect)) <= 1e-12


@mark.parametrize("fraction", (0.1, 0.3, 0.5, 0.7, 0.9))
def test_certified_propagation_inequality(fraction):
    p = certified(pwl([[-2, 1.5], [0, 2.5], [2, 1.5]], 1.5, 1.5))
    theta = fraction * theta_range(p)
    transformed = p_theta(p, theta)
    factor = 4.0 * (1.0 - theta) / (2.0 - theta * p.p_plus) ** 2
    generator = np.random.RandomState(7)
    x, y = generator.uniform(-5, 5, 2000), generator.uniform(-5, 5, 2000)
    lhs = np.abs(transformed(x) - transformed(y))
    rhs = factor * np.abs(p(x) - p(y))
    assert np.all(lhs <= rhs + 1e-12)
    assert transformed.certificate is not None
    assert abs(transformed.certificate.c0 - factor * p.certificate.c0) < 1e-12


def test_theta_cloud_stays_inside_range():
    p = certified(bump())
    cloud = theta_cloud(p, count=6)
    assert len(cloud) == 6
    for point in cloud:
        assert 0.0 < point.theta < point.theta_max
        assert point.identity_defect(SAMPLES) <= 1e-12
        assert point.tau == theta_range(p)


@mark.parametrize("p intervals".split(), (
    (4.0, [(1.0, 4.0 / 3.0), (4.0, math.inf)]),
    (2.0, []),
    (4.0 / 3.0, [(1.0, 4.0 / 3.0), (4.0, math.inf)]),
))
def test_rp_range(p, intervals):
    computed = rp_range(p)
    assert len(computed) == len(intervals)
    for (lo, hi), (elo, ehi) in zip(computed, intervals):
        assert abs(lo - elo) < 1e-12
        assert hi == ehi or abs(hi - ehi) < 1e-12


@given(floats(min_value=1.01, max_value=50.0), floats(min_value=1.01, max_value=50.0))
def test_rp_range_is_symmetric_under_conjugation(r, p):
    r_conjugate = r / (r - 1.0)
    # avoid the boundary where floating point decides membership
    d_r, d_p = abs(1.0 / r - 0.5), abs(1.0 / p - 0.5)
    if abs(d_r - d_p) > 1e-9:
        assert in_rp_range(r, p) == in_rp_range(r_conjugate, p)


def test_rp_range_needs_finite_exponent():
    with raises(InvalidExponent):
        rp_range(1.0)


def test_decomposition_identity():
    p = pwl([[-1, 2.5], [1, 3.5]], 2.5, 3.5)
    decomposition = diening_decomposition(p, 2.0, 0.25)
    assert isinstance(decomposition.p_theta, DerivedExponent)
    assert verify_decomposition(p, decomposition, SAMPLES) <= 1e-9


@given(floats(min_value=1.2, max_value=8.0), integers(min_value=0, max_value=1))
def test_constant_decomposition_is_admissible(p, large_p0):
    p0 = 4.0 if large_p0 else 1.5
    decomposition = constant_decomposition(p, p0=p0)
    assert 0.0 < decomposition.theta < 1.0
    assert decomposition.p_theta.p_minus > 1.0
    assert verify_decomposition(ConstantExponent(p), decomposition, SAMPLES) <= 1e-9


@mark.parametrize("p0 theta".split(), ((2.0, 0.0), (2.0, 1.0), (1.0, 0.5), (1.1, 0.95)))
def test_bad_decompositions(p0, theta):
    with raises(BadDecomposition):
        diening_decomposition(ConstantExponent(3.0), p0, theta)


def test_piecewise_linear_rejects_unsorted_knots():
    with raises(SpecParseError):
        PiecewiseLinearExponent(((1.0, 2.0), (0.0, 3.0)), 2.0, 2.0)
