import numpy as np

from pytest import mark, raises
from scipy.integrate import trapezoid
from hypothesis import given, settings
from hypothesis.strategies import floats, integers

from vlex_multipliers.errors import IntervalOutOfGrid, NonFinite, SpecParseError
from vlex_multipliers.exponent import ConstantExponent, VariableExponent
from vlex_multipliers.grid import (
    Grid,
    GridFunction,
    averaged_indicator_constant,
    dyadic_intervals,
    indicator_norm,
    lp_integral_norm,
    luxemburg_norm,
    modular,
    read_csv,
    write_csv
)

PLASTIC = 1.32471795724474

GRID = Grid(4.0, 4096)
H = GRID.step


def two_three():
    # 2 left of 1, 3 right of 1
    return VariableExponent.from_spec({"kind": "pwl", "knots": [[1, 2]], "left_tail": 2, "right_tail": 3})


def bump():
    return VariableExponent.from_spec(
        {"kind": "pwl", "knots": [[-1, 2], [0, 3], [1, 2]], "left_tail": 2, "right_tail": 2}
    )


@mark.parametrize("half_width count".split(), ((0.0, 64), (-1.0, 64), (1.0, 100), (1.0, 4), (float("inf"), 64)))
def test_invalid_grids(half_width, count):
    with raises(SpecParseError):
        Grid(half_width, count)


def test_grid_nodes_and_dual():
    grid = Grid(10.0, 1024)
    assert grid.nodes[0] == -10.0
    assert abs(grid.nodes[1] - grid.nodes[0] - grid.step) < 1e-12
    assert abs(grid.dual().half_width - np.pi / grid.step) < 1e-12


def test_non_finite_samples_are_rejected():
    samples = np.ones(GRID.count)
    samples[3] = np.nan
    with raises(NonFinite):
        GridFunction(GRID, samples)


def test_modular_examples():
    chi = GridFunction.indicator(GRID, 0.0, 1.0)
    assert abs(modular(chi, ConstantExponent(3.0), 2.0) - 0.125) <= 2 * H
    assert modular(GridFunction.zeros(GRID), ConstantExponent(3.0), 0.5) == 0.0
    chi2 = GridFunction.indicator(GRID, 0.0, 2.0)
    assert abs(modular(chi2, two_three(), 1.0) - 2.0) <= 2 * H


def test_luxemburg_norm_examples():
    chi = GridFunction.indicator(GRID, 0.0, 1.0)
    assert abs(luxemburg_norm(chi, ConstantExponent(2.0)) - 1.0) <= 2 * H
    assert abs(luxemburg_norm(chi * 2.0, ConstantExponent(2.0)) - 2.0) <= 4 * H
    assert luxemburg_norm(GridFunction.zeros(GRID), two_three()) == 0.0


def test_variable_norm_of_two_pieces_is_the_plastic_number():
    chi2 = GridFunction.indicator(GRID, 0.0, 2.0)
    assert abs(luxemburg_norm(chi2, two_three()) - PLASTIC) <= 4 * H


def test_unit_ball_law():
    f = GridFunction.gaussian(GRID, center=0.3, width=0.7, frequency=2.0)
    p = bump()
    norm = luxemburg_norm(f, p)
    assert abs(modular(f * (1.0 / norm), p, 1.0) - 1.0) <= 1e-6


@settings(max_examples=25, deadline=None)
@given(floats(min_value=-50.0, max_value=50.0).filter(lambda c: abs(c) > 0.1))
def test_homogeneity(c):
    f = GridFunction.gaussian(GRID, width=0.5)
    p = bump()
    assert abs(luxemburg_norm(f * c, p) - abs(c) * luxemburg_norm(f, p)) <= 1e-9 * abs(c) * luxemburg_norm(f, p) + 1e-12


@settings(max_examples=25, deadline=None)
@given(integers(min_value=0, max_value=2 ** 31 - 1))
def test_triangle_inequality(seed):
    generator = np.random.RandomState(seed)
    p = bump()
    f = GridFunction.gaussian(GRID, center=generator.uniform(-1, 1), width=generator.uniform(0.2, 1.0),
                              amplitude=generator.standard_normal() + 1j * generator.standard_normal())
    g = GridFunction.gaussian(GRID, center=generator.uniform(-1, 1), width=generator.uniform(0.2, 1.0),
                              frequency=generator.uniform(-3, 3))
    lhs = luxemburg_norm(f + g, p)
    assert lhs <= (luxemburg_norm(f, p) + luxemburg_norm(g, p)) * (1.0 + 1e-8)


def test_modular_is_monotone_in_lambda():
    f = GridFunction.gaussian(GRID, width=0.8)
    p = bump()
    values = [modular(f, p, lam) for lam in (0.25, 0.5, 1.0, 2.0, 4.0)]
    assert all(a >= b for a, b in zip(values, values[1:]))


@mark.parametrize("r", (1.5, 2.0, 3.0, 7.0))
def test_constant_exponent_matches_closed_form(r):
    f = GridFunction.gaussian(GRID, width=0.6, frequency=1.0)
    closed = float(trapezoid(np.abs(f.samples) ** r, dx=H)) ** (1.0 / r)
    assert abs(luxemburg_norm(f, ConstantExponent(r)) - closed) <= 1e-12 * closed
    assert abs(lp_integral_norm(f, r) - closed) <= 1e-12 * closed


def test_indicator_norm_of_constant_exponent():
    assert abs(indicator_norm(ConstantExponent(3.0), 0.0, 8.0, GRID) - 2.0) < 1e-12


@mark.parametrize("a b".split(), ((0.0, 1.0), (-2.0, 0.5), (1.0, 3.5)))
def test_averaged_indicator_constant_of_two(a, b):
    assert abs(averaged_indicator_constant(ConstantExponent(2.0), [(a, b)], GRID) - 1.0) < 1e-12


def test_averaged_indicator_constant_of_three_on_unit_interval():
    assert abs(averaged_indicator_constant(ConstantExponent(3.0), [(0.0, 1.0)], GRID) - 1.0) < 1e-12


def test_averaged_indicator_constant_reports_sweep_maximum():
    p = bump()
    intervals = dyadic_intervals(GRID)
    best = averaged_indicator_constant(p, intervals, GRID)
    sampled = averaged_indicator_constant(p, intervals[::3], GRID)
    assert best >= sampled
    assert best >= 1.0 - 1e-9


def test_intervals_outside_the_grid_are_rejected():
    with raises(IntervalOutOfGrid):
        averaged_indicator_constant(ConstantExponent(2.0), [(3.0, 5.0)], GRID)
    with raises(IntervalOutOfGrid):
        averaged_indicator_constant(ConstantExponent(2.0), [(1.0, 1.0)], GRID)


def test_csv_write_and_read(tmp_path):
    f = GridFunction.gaussian(Grid(2.0, 64), frequency=1.5)
    path = str(tmp_path / "f.csv")
    write_csv(path, f)
    g = read_csv(path)
    assert g.grid == f.grid
    assert np.array_equal(g.samples, f.samples)


@mark.parametrize("content", ("", "t,re,im\n", "x,y\n1,2\n", "t,re,im\n0,a,0\n"))
def test_bad_csv_files(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with raises(SpecParseError):
        read_csv(str(path))
