import math

import numpy as np
import sympy

from pytest import mark, raises

from vlex_multipliers.errors import BudgetZero, ConfigError, DecayViolation, NoUpperBoundAvailable
from vlex_multipliers.expressions import X
from vlex_multipliers.exponent import ConstantExponent, VariableExponent
from vlex_multipliers.grid import Grid, GridFunction, l2_norm
from vlex_multipliers.symbols import Symbol, WienerForm
from vlex_multipliers.transform import (
    SBoundSource,
    SearchConfig,
    UpperProvenance,
    apply_multiplier,
    cauchy_singular,
    default_s_bound,
    fourier,
    inverse_fourier,
    maximal_function,
    multiplier_norm_bounds,
    opnorm_lower,
    principal_value_oracle,
    resolve_s_bound
)

GRID = Grid(20.0, 4096)
SMALL_SEARCH = SearchConfig(seed=0, starts=2, iters=3, half_width=32.0, count=1024)


def lorentzian():
    density = Symbol.from_expression("exp(-abs(x))")
    return Symbol.from_expression("2/(1+x^2)", name="lorentzian", wiener=WienerForm(0.0, density))


def bump():
    return VariableExponent.from_spec(
        {"kind": "pwl", "knots": [[-1, 2], [0, 3], [1, 2]], "left_tail": 2, "right_tail": 2}
    )


def test_gaussian_is_self_dual():
    spectrum = fourier(GridFunction.gaussian(GRID))
    x = spectrum.nodes
    expected = math.sqrt(2.0 * math.pi) * np.exp(-x ** 2 / 2.0)
    assert np.max(np.abs(spectrum.samples - expected)) <= 1e-6 * math.sqrt(2.0 * math.pi)


def test_transform_of_indicator():
    spectrum = fourier(GridFunction.indicator(GRID, -1.0, 1.0))
    x = spectrum.nodes
    inside = (np.abs(x) <= 10.0) & (x != 0.0)
    expected = 2.0 * np.sin(x[inside]) / x[inside]
    assert np.max(np.abs(spectrum.samples[inside] - expected)) < 1e-3


def test_round_trip():
    f = GridFunction.gaussian(GRID, center=0.5, width=1.3, frequency=-2.0, amplitude=1 - 2j)
    back = inverse_fourier(fourier(f))
    assert back.grid == f.grid
    assert np.max(np.abs(back.samples - f.samples)) <= 1e-10 * f.sup


def test_non_decaying_input_is_rejected():
    with raises(DecayViolation):
        fourier(GridFunction(GRID, np.ones(GRID.count)))


def test_unit_symbol_is_the_identity():
    f = GridFunction.gaussian(GRID, width=0.8, frequency=3.0)
    g = apply_multiplier(Symbol.constant(1.0), f)
    assert np.max(np.abs(g.samples - f.samples)) <= 1e-12


def test_modulation_symbol_translates():
    shift = 8 * GRID.step
    f = GridFunction.gaussian(GRID)
    g = apply_multiplier(Symbol.from_expression(sympy.exp(sympy.I * shift * X)), f)
    expected = GridFunction.gaussian(GRID, center=shift)
    assert np.max(np.abs(g.samples - expected.samples)) <= 1e-10


def test_cauchy_singular_matches_principal_value():
    grid = Grid(160.0, 2 ** 15)
    f = GridFunction.gaussian(grid)
    middle = grid.count // 2
    indices = [middle + k * 100 for k in (-2, -1, 0, 1, 2)]
    computed = cauchy_singular(f).samples[indices]
    assert np.max(np.abs(computed - principal_value_oracle(f, indices))) < 1e-4


def test_cauchy_singular_is_an_isometric_involution():
    # spectrum concentrated at x = 10, where sgn is 1
    f = GridFunction.gaussian(GRID, frequency=10.0)
    g = cauchy_singular(f)
    assert abs(l2_norm(g) - l2_norm(f)) <= 1e-9 * l2_norm(f)
    assert np.max(np.abs(cauchy_singular(g).samples - f.samples)) <= 1e-9


def test_cauchy_singular_of_indicator():
    grid = Grid(80.0, 2 ** 17)
    chi = GridFunction.indicator(grid, -1.0, 1.0)
    g = cauchy_singular(chi)
    x = grid.nodes
    outside = (np.abs(x) >= 2.0) & (np.abs(x) <= 3.0)
    expected = np.log(np.abs((1.0 - x[outside]) / (1.0 + x[outside]))) / (math.pi * 1j)
    assert np.max(np.abs(g.samples[outside] - expected)) < 1e-3


def test_maximal_function_of_indicator():
    grid = Grid(4.0, 1024)
    m = maximal_function(GridFunction.indicator(grid, 0.0, 1.0))
    x = grid.nodes
    right = (x > 1.5) & (x < 3.5)
    assert np.max(np.abs(m.samples[right] - 1.0 / x[right])) <= 2 * grid.step


def test_maximal_function_dominates():
    f = GridFunction.gaussian(GRID, width=2.0, frequency=1.0)
    assert np.all(maximal_function(f).samples >= f.magnitude - 1e-15)


def test_maximal_function_methods_agree():
    generator = np.random.RandomState(3)
    grid = Grid(4.0, 300)
    f = GridFunction(grid, generator.standard_normal(grid.count) + 1j * generator.standard_normal(grid.count))
    blocked = maximal_function(f, method="blocked")
    exhaustive = maximal_function(f, method="exhaustive")
    assert np.array_equal(blocked.samples, exhaustive.samples)
    with raises(ValueError):
        maximal_function(f, method="greedy")


def test_identity_has_norm_one():
    lower = opnorm_lower(lambda f: f, bump(), SMALL_SEARCH)
    assert abs(lower.value - 1.0) <= 1e-9


@mark.parametrize("starts iters".split(), ((0, 3), (2, 0)))
def test_search_needs_a_budget(starts, iters):
    search = SearchConfig(seed=0, starts=starts, iters=iters, half_width=32.0, count=1024)
    with raises(BudgetZero):
        opnorm_lower(lambda f: f, ConstantExponent(2.0), search)


def test_search_grid_too_coarse_for_gaussians():
    search = SearchConfig(seed=0, starts=1, iters=1, half_width=32.0, count=64)
    with raises(ConfigError):
        opnorm_lower(lambda f: f, ConstantExponent(2.0), search)


@mark.parametrize("r expected".split(), ((2.0, 1.0), (4.0, 1.0 / math.tan(math.pi / 8.0)), (4.0 / 3.0, 1.0 / math.tan(math.pi / 8.0))))
def test_default_s_bound(r, expected):
    assert abs(default_s_bound(r) - expected) < 1e-12


def test_s_bound_below_one_is_rejected():
    with raises(ValueError):
        resolve_s_bound(ConstantExponent(3.0), 0.5)
    assert resolve_s_bound(bump(), None) is None


@mark.parametrize("c p".split(), ((2.5, 2.0), (-1.5j, 3.0), (0.5 + 0.5j, 1.5)))
def test_constant_symbol_bracket_is_tight(c, p):
    estimate = multiplier_norm_bounds(Symbol.constant(c), ConstantExponent(p), search=SMALL_SEARCH)
    assert abs(estimate.upper - abs(c)) <= 1e-9
    assert abs(estimate.lower - abs(c)) <= 1e-9 * abs(c)


def test_lorentzian_upper_bound_is_wiener():
    estimate = multiplier_norm_bounds(lorentzian(), ConstantExponent(3.0), search=SMALL_SEARCH)
    assert estimate.upper_provenance is UpperProvenance.WIENER
    assert abs(estimate.upper - 2.0) < 1e-6
    assert estimate.lower <= estimate.upper


def test_no_upper_bound_without_variation_or_wiener_form():
    with raises(NoUpperBoundAvailable):
        multiplier_norm_bounds(Symbol.from_expression("sin(x)"), ConstantExponent(3.0), search=SMALL_SEARCH)


@mark.parametrize("p s_bound expected".split(), (
    (ConstantExponent(3.0), None, SBoundSource.CLASSICAL),
    (ConstantExponent(3.0), 4.0, SBoundSource.SUPPLIED),
    (bump(), 4.0, SBoundSource.SUPPLIED),
    (bump(), None, SBoundSource.ABSENT),
))
def test_estimate_records_where_the_s_bound_came_from(p, s_bound, expected):
    estimate = multiplier_norm_bounds(lorentzian(), p, s_bound=s_bound, search=SMALL_SEARCH)
    assert estimate.metadata["s_bound_source"] == expected.value
    if expected is SBoundSource.CLASSICAL:
        assert estimate.metadata["s_bound"] == default_s_bound(3.0)
    elif expected is SBoundSource.SUPPLIED:
        assert estimate.metadata["s_bound"] == 4.0
    else:
        assert estimate.metadata["s_bound"] is None


@mark.slow
def test_lorentzian_witness_quality():
    at_two = multiplier_norm_bounds(lorentzian(), ConstantExponent(2.0))
    assert at_two.lower >= 0.98 * 2.0
    at_three = multiplier_norm_bounds(lorentzian(), ConstantExponent(3.0))
    assert at_three.upper_provenance is UpperProvenance.WIENER
    assert at_three.lower >= 1.9


@mark.slow
def test_cauchy_singular_norm_on_l2():
    lower = opnorm_lower(cauchy_singular, ConstantExponent(2.0))
    assert 0.98 <= lower.value <= 1.0 + 1e-6
