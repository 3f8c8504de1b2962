import math
import csv

import numpy as np
import sympy

from pytest import mark, raises
from scipy.integrate import quad
from hypothesis import given, settings
from hypothesis.strategies import floats, integers

from vlex_multipliers.errors import NotEnclosable, NotInSO3, SpecParseError, UnboundedVariation
from vlex_multipliers.expressions import X
from vlex_multipliers.symbols import (
    MollifiedSymbol,
    MultiplierSymbol,
    Symbol,
    SymbolClass,
    WienerForm,
    blaschke_rational,
    convolve_mollify,
    jump_killer_at,
    jump_killer_infinity,
    mollifier,
    mollifier_constant,
    osc,
    pc0_quantize,
    psi_n,
    refinement_variation,
    sgn,
    so3_norm,
    sup_norm,
    symbol_wiener_norm,
    total_variation,
    unit_step,
    vnorm,
    wiener_defect,
    wiener_norm,
    write_symbol_csv
)
from vlex_multipliers.symbols.enclosure import derivative_bounds, modulus_enclosure, symbol_sup, tail_sup

SAMPLES = np.concatenate([np.linspace(-50.0, 50.0, 2001), [-1e6, -1e3, 1e3, 1e6]])


def lorentzian():
    density = Symbol.from_expression("exp(-abs(x))")
    return Symbol.from_expression("2/(1+x^2)", name="lorentzian", wiener=WienerForm(0.0, density))


def arctan():
    return Symbol.from_expression("atan(x)", name="atan")


def test_psi_values():
    psi = psi_n(1)
    assert psi(0.5) == 1.0
    assert abs(psi(1.5) - 0.5) < 1e-15
    assert psi(2.5) == 0.0
    with raises(ValueError):
        psi_n(0)


@mark.parametrize("n", (1, 2, 7, 33, 100))
def test_psi_vnorm_is_three(n):
    assert vnorm(psi_n(n)) == 3.0


def test_variation_of_arctan():
    assert abs(total_variation(arctan()) - math.pi) < 1e-6


def test_variation_of_unit_step():
    step = unit_step()
    assert total_variation(step) == 1.0
    assert vnorm(step) == 2.0


def test_oscillating_symbol_has_unbounded_variation():
    with raises(UnboundedVariation):
        total_variation(Symbol.from_expression("sin(x)"))


def test_variation_matches_refinement_sums():
    hat = jump_killer_at(0.0, 2.0, -1j)
    expected = 2.0 + abs(-1j - 2.0) + 1.0
    assert abs(total_variation(hat) - expected) < 1e-12
    refined = refinement_variation(hat, np.linspace(-2.0, 2.0, 40001))
    assert 0.0 <= expected - refined < 1e-3


@settings(max_examples=30, deadline=None)
@given(floats(min_value=-3.0, max_value=3.0), floats(min_value=-3.0, max_value=3.0),
       floats(min_value=-2.0, max_value=2.0), floats(min_value=-2.0, max_value=2.0))
def test_variation_is_subadditive(x0, x1, left, right):
    a = jump_killer_at(x0, left, right)
    b = unit_step(x1, right, left)
    assert total_variation(a + b) <= total_variation(a) + total_variation(b) + 1e-8


@mark.parametrize("c", (0.0, 3.0, -2.5, 1 + 1j))
def test_wiener_norm_of_constants(c):
    assert wiener_norm(c) == abs(c)
    assert symbol_wiener_norm(Symbol.constant(c)) == abs(c)


def test_wiener_norm_of_lorentzian():
    a = lorentzian()
    assert abs(symbol_wiener_norm(a) - 2.0) < 1e-9
    assert abs(wiener_norm(0.0, "exp(-abs(x))") - 2.0) < 1e-9
    assert abs(symbol_wiener_norm(a * 2.0) - 2.0 * symbol_wiener_norm(a)) < 1e-10


def test_lorentzian_density_represents_the_symbol():
    assert wiener_defect(lorentzian(), [-3.0, 0.0, 0.7, 5.0]) < 1e-8


@mark.parametrize("k", (1, 2, -1))
def test_blaschke_density_represents_the_symbol(k):
    assert wiener_defect(blaschke_rational(k), [-2.0, 0.0, 0.5, 3.0]) < 1e-7


def test_blaschke_values():
    assert blaschke_rational(0).is_constant
    assert blaschke_rational(0)(3.0) == 1.0
    assert abs(blaschke_rational(1)(0.0) + 1.0) < 1e-15


@mark.parametrize("k", range(-8, 9))
def test_blaschke_is_unimodular(k):
    r = blaschke_rational(k)
    assert np.max(np.abs(np.abs(r(SAMPLES)) - 1.0)) < 1e-12
    assert r.limits == (1.0, 1.0)
    assert r.belongs_to(SymbolClass.DOT_CONTINUOUS)


def test_so3_norm_of_constant():
    assert so3_norm(Symbol.constant(5.0)) == 5.0


def test_so3_norm_needs_vanishing_dilations():
    with raises(NotInSO3):
        so3_norm(Symbol.from_expression("log(1+x^2)"))
    with raises(NotInSO3):
        so3_norm(sgn())


def test_so3_norm_of_arctan_is_finite():
    value = so3_norm(arctan())
    assert math.isfinite(value)
    assert value >= math.pi / 2.0


def test_oscillation():
    assert abs(osc(arctan(), (-1.0, 1.0)) - math.pi / 2.0) < 1e-12
    assert osc(lambda x: np.ones_like(x), (0.0, 5.0)) == 0.0


def test_mollifier_constant():
    assert abs(mollifier_constant() - 2.25228) < 1e-5


@mark.parametrize("delta", (0.1, 1.0, 10.0))
def test_mollifier_has_unit_mass(delta):
    phi = mollifier(delta)
    mass, _ = quad(lambda y: float(np.real(phi(y))), -delta, delta, epsabs=1e-13, epsrel=1e-12)
    assert abs(mass - 1.0) < 1e-9


def test_mollified_constant_is_unchanged():
    smooth = convolve_mollify(Symbol.constant(1.0), 0.5)
    assert isinstance(smooth, MultiplierSymbol)
    assert np.max(np.abs(smooth(np.linspace(-3.0, 3.0, 13)) - 1.0)) < 1e-9


def test_mollification_defect_shrinks_with_delta():
    x = np.linspace(-4.0, 4.0, 161)
    defects = [float(np.max(np.abs(convolve_mollify(arctan(), delta).defect(x))))
               for delta in (1.0, 0.5, 0.25, 0.125)]
    assert all(b <= a + 1e-9 for a, b in zip(defects, defects[1:]))


@mark.parametrize("limits expected".split(), (((0, 1), 2.0), ((1, 1), 1.0), ((-1, 2), 5.0)))
def test_jump_killer_infinity_norm(limits, expected):
    killer = jump_killer_infinity(limits)
    assert abs(vnorm(killer) - expected) < 1e-12
    assert killer.limits == (complex(limits[0]), complex(limits[1]))


@settings(max_examples=100, deadline=None)
@given(floats(min_value=-10.0, max_value=10.0), floats(min_value=-10.0, max_value=10.0))
def test_jump_killer_infinity_norm_formula(left, right):
    expected = max(abs(left), abs(right)) + abs(right - left)
    assert abs(vnorm(jump_killer_infinity((left, right))) - expected) <= 1e-12 * max(1.0, expected)


def test_jump_killer_at_shape():
    hat = jump_killer_at(0.0, 0.0, 1.0)
    assert abs(hat(0.5) - 0.5) < 1e-15
    assert hat(1.5) == 0.0
    assert hat(-1.5) == 0.0
    assert [(j.location, j.left, j.right) for j in hat.jumps] == [(0.0, 0.0, 1.0)]


def test_quantizing_lattice_valued_steps_keeps_them():
    step = unit_step(0.0, -1.0, 2.0)
    quantized = pc0_quantize(step, 0.5)
    assert np.array_equal(quantized(SAMPLES), step(SAMPLES))


def test_quantized_arctan():
    step = math.pi / 10.0
    a = arctan()
    b = pc0_quantize(a, step)
    assert b.belongs_to(SymbolClass.PIECEWISE_CONSTANT)
    assert np.max(np.abs(b(SAMPLES) - a(SAMPLES))) <= step / 2.0 + 1e-12
    assert total_variation(b) <= total_variation(a) + 1e-9


def test_quantization_needs_limits():
    with raises(UnboundedVariation):
        pc0_quantize(Symbol.from_expression("sin(x)"), 0.1)
    with raises(ValueError):
        pc0_quantize(arctan(), 0.0)


@mark.parametrize("symbol classes".split(), (
    (lorentzian(), {SymbolClass.C0, SymbolClass.DOT_CONTINUOUS, SymbolClass.BAR_CONTINUOUS, SymbolClass.PC0}),
    (arctan(), {SymbolClass.BAR_CONTINUOUS, SymbolClass.PC0}),
    (sgn(), {SymbolClass.PIECEWISE_CONSTANT, SymbolClass.PC0}),
    (Symbol.from_expression("sin(x)"), set()),
))
def test_symbol_classes(symbol, classes):
    assert symbol.classes == classes


def test_sup_norms():
    assert sup_norm(psi_n(3)) == 1.0
    assert abs(sup_norm(lorentzian()) - 2.0) < 1e-12
    assert abs(sup_norm(arctan()) - math.pi / 2.0) < 1e-12


def test_symbol_spec_with_consistent_jumps():
    spec = {
        "pieces": [{"lower": "-inf", "upper": 0, "expr": "-1"}, {"lower": 0, "upper": "inf", "expr": "1"}],
        "jumps": [[0, -1, 1]],
    }
    symbol = Symbol.from_spec(spec)
    assert symbol(-0.5) == -1.0
    assert symbol(0.0) == 1.0
    assert MultiplierSymbol.from_spec(symbol.spec())(2.0) == 1.0


@mark.parametrize("spec", (
    {"expr": "x", "pieces": []},
    {"expr": "2/(1+x^2)", "colour": "red"},
    {"expr": "y+1"},
    {"pieces": [{"lower": "-inf", "upper": 0, "expr": "-1"}, {"lower": 0, "upper": "inf", "expr": "1"}],
     "jumps": [[0, 1, -1]]},
    {"pieces": [{"lower": "-inf", "upper": 0, "expr": "-1"}, {"lower": 1, "upper": "inf", "expr": "1"}]},
    {"expr": "atan(x)", "limits": [0, 0]},
))
def test_malformed_symbol_specs(spec):
    with raises(SpecParseError):
        Symbol.from_spec(spec)


def test_symbol_csv_export(tmp_path):
    path = str(tmp_path / "lorentzian.csv")
    write_symbol_csv(path, lorentzian(), [-1.0, 0.0, 1.0])
    with open(path) as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["x", "re", "im"]
    assert [float(value) for value in rows[2]] == [0.0, 2.0, 0.0]


@settings(max_examples=20, deadline=None)
@given(integers(min_value=-5, max_value=5), floats(min_value=-3.0, max_value=3.0))
def test_sums_evaluate_pointwise(k, x):
    a, b = blaschke_rational(k), jump_killer_at(0.5, 1.0, -2.0)
    assert abs((a + b)(x) - (a(x) + b(x))) < 1e-12
    assert abs((a * b)(x) - a(x) * b(x)) < 1e-12


def far_bump():
    return Symbol.from_expression("exp(-(x-5000)^2)", name="far_bump")


ENCLOSED = (
    "exp(-x^2)*sin(3*x)",
    "atan(x)/(1+x^2)",
    "sqrt(1+x^2)",
    "log(2+cos(x))",
    "abs(x-1)*exp(-abs(x))",
    "((x-I)/(x+I))^2",
    "2^x/(1+4^x)",
)


@mark.parametrize("text", ENCLOSED)
def test_enclosure_contains_the_values(text):
    a = Symbol.from_expression(text)
    edges = np.linspace(-10.0, 10.0, 201)
    bounds = modulus_enclosure(a.pieces[0].expr)(edges[:-1], edges[1:])
    inside = edges[:-1, None] + np.linspace(0.0, 1.0, 17)[None, :] * np.diff(edges)[:, None]
    values = np.abs(a.evaluate(inside.ravel())).reshape(inside.shape)
    assert np.all(np.max(values, axis=1) <= bounds)


def test_expression_without_interval_rule():
    with raises(NotEnclosable):
        modulus_enclosure(sympy.gamma(X))


@mark.parametrize("radius", (1.0, 3.0, 100.0))
def test_tail_sup_of_lorentzian(radius):
    expected = 2.0 / (1.0 + radius ** 2)
    tail = tail_sup(lorentzian(), radius)
    assert tail.value <= expected * (1.0 + 1e-12)
    assert expected <= tail.bound <= expected * (1.0 + 1e-3)


def test_far_bump_is_enclosed():
    found = symbol_sup(far_bump(), -math.inf, math.inf)
    assert 0.999 < found.value <= 1.0 <= found.bound < 1.001
    assert abs(found.argmax - 5000.0) < 0.1
    assert tail_sup(far_bump(), 6000.0).bound < 1e-12


def test_norms_see_a_far_bump():
    assert sup_norm(far_bump()) > 0.999
    assert abs(total_variation(far_bump()) - 2.0) < 1e-6


def test_derivative_bounds_cover_sampled_slopes():
    a = psi_n(2) * lorentzian()
    lower = np.linspace(-4.0, 3.9, 80)
    bounds = derivative_bounds(a, 1, lower, lower + 0.1)
    inside = lower[:, None] + np.linspace(0.0, 0.1, 11)[None, :]
    slopes = np.abs(a.derivative(1)(inside.ravel())).reshape(inside.shape)
    assert np.all(np.max(slopes, axis=1) <= bounds)


def test_derivative_bounds_of_a_kink_are_infinite():
    bounds = derivative_bounds(Symbol.from_expression("abs(x)"), 2, np.array([-1.0, 1.0]), np.array([1.0, 2.0]))
    assert math.isinf(bounds[0])
    assert bounds[1] < 1e-300


@mark.parametrize("delta", (0.5, 0.25, 0.125))
def test_defect_bound_covers_the_defect(delta):
    base = Symbol.from_expression("exp(-x^2)*cos(2*x)", name="wave")
    x = np.linspace(-3.0, 3.0, 61)
    bounded = MollifiedSymbol(base, delta, series_switch=1.0).defect_bound(x)
    exact = np.abs(MollifiedSymbol(base, delta, series_switch=0.0).defect(x))
    assert np.all(exact <= bounded + 1e-12)
