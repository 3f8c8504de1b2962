import math

import numpy as np

from pytest import mark, raises
from hypothesis import given, settings
from hypothesis.strategies import floats, integers

from vlex_multipliers.errors import (
    BudgetExceeded,
    BudgetZero,
    ConfigError,
    InvalidExponent,
    NonFinite,
    SpecParseError
)
from vlex_multipliers.exponent import ConstantExponent
from vlex_multipliers.oracle import (
    Check,
    DftModel,
    DiscreteSpace,
    SuiteConfig,
    SuiteReport,
    SuiteRow,
    case_ids,
    check_riesz_thorin,
    discrete_luxemburg,
    discrete_opnorm,
    interpolation_constant,
    luxemburg_gradient,
    run_property_suite,
    run_riesz_thorin_corpus
)
from vlex_multipliers.oracle.DiscreteSpace import read_csv
from vlex_multipliers.symbols import Symbol, sgn

PLASTIC = 1.32471795724474
VARIABLE = DiscreteSpace([1.0, 0.5, 2.0, 1.0], [1.5, 2.0, 3.0, 4.5])


def test_plastic_root():
    assert abs(discrete_luxemburg([1.0, 1.0], DiscreteSpace([1.0, 1.0], [2.0, 3.0])) - PLASTIC) < 1e-8


def test_constant_exponent_closed_form():
    assert abs(discrete_luxemburg([3.0, 4.0j], DiscreteSpace.constant(2, 2.0)) - 5.0) < 1e-12
    weights = [0.5, 2.0, 1.0]
    v = np.array([1.0, -2.0, 0.5j])
    expected = float(np.sum(np.array(weights) * np.abs(v) ** 3.0)) ** (1.0 / 3.0)
    assert abs(discrete_luxemburg(v, DiscreteSpace.constant(3, 3.0, weights)) - expected) < 1e-12


@mark.parametrize("i", range(4))
def test_unit_vectors(i):
    e = np.zeros(4)
    e[i] = 1.0
    expected = VARIABLE.weights[i] ** (1.0 / VARIABLE.exponents[i])
    assert abs(discrete_luxemburg(e, VARIABLE) - expected) < 1e-12


def test_zero_vector_has_norm_zero():
    assert discrete_luxemburg(np.zeros(4), VARIABLE) == 0.0


def test_bad_vectors_are_rejected():
    with raises(NonFinite):
        discrete_luxemburg([1.0, np.nan, 0.0, 0.0], VARIABLE)
    with raises(NonFinite):
        discrete_luxemburg([1.0, np.inf, 0.0, 0.0], VARIABLE)
    with raises(ValueError):
        discrete_luxemburg([1.0, 2.0], VARIABLE)


@mark.parametrize("weights exponents error".split(), (
    ([1.0, 1.0], [2.0, 1.0], InvalidExponent),
    ([1.0, 1.0], [2.0, math.inf], InvalidExponent),
    ([1.0, 0.0], [2.0, 3.0], ValueError),
    ([1.0], [2.0, 3.0], ValueError),
))
def test_invalid_spaces(weights, exponents, error):
    with raises(error):
        DiscreteSpace(weights, exponents)


@settings(max_examples=50, deadline=None)
@given(floats(min_value=1e-6, max_value=1e6), integers(min_value=0, max_value=2 ** 31))
def test_norm_is_positively_homogeneous(scale, seed):
    generator = np.random.RandomState(seed)
    v = generator.standard_normal(4) + 1j * generator.standard_normal(4)
    assert abs(discrete_luxemburg(scale * v, VARIABLE) - scale * discrete_luxemburg(v, VARIABLE)) \
        <= 1e-12 * scale * discrete_luxemburg(v, VARIABLE)


def test_modular_at_the_norm_is_one():
    v = np.array([0.3, -1.2 + 0.4j, 2.0, 0.01j])
    norm = discrete_luxemburg(v, VARIABLE)
    modular = float(np.sum(VARIABLE.weights * np.abs(v / norm) ** VARIABLE.exponents))
    assert abs(modular - 1.0) < 1e-12


def test_gradient_matches_finite_differences():
    v = np.array([0.3, -1.2 + 0.4j, 2.0, 0.5j])
    gradient = luxemburg_gradient(v, discrete_luxemburg(v, VARIABLE), VARIABLE)
    h = 1e-6
    for i in range(4):
        e = np.zeros(4, dtype=complex)
        e[i] = h
        real = (discrete_luxemburg(v + e, VARIABLE) - discrete_luxemburg(v - e, VARIABLE)) / (2 * h)
        imaginary = (discrete_luxemburg(v + 1j * e, VARIABLE) - discrete_luxemburg(v - 1j * e, VARIABLE)) / (2 * h)
        assert abs(real - gradient[i].real) < 1e-6
        assert abs(imaginary - gradient[i].imag) < 1e-6


def test_interpolated_space():
    space = DiscreteSpace.constant(3, 2.0).interpolated(DiscreteSpace.constant(3, 4.0), 0.5)
    assert np.allclose(space.exponents, 8.0 / 3.0)
    with raises(ValueError):
        DiscreteSpace.constant(3, 2.0).interpolated(DiscreteSpace.constant(2, 4.0), 0.5)


def test_read_csv(tmp_path):
    path = tmp_path / "plastic.csv"
    path.write_text("w,p,re,im\n1,2,1,0\n1,3,0,1\n")
    v, space = read_csv(str(path))
    assert space.dimension == 2
    assert abs(discrete_luxemburg(v, space) - PLASTIC) < 1e-8


@mark.parametrize("content", (
    "",
    "x,p,re,im\n1,2,1,0\n",
    "w,p,re,im\n",
    "w,p,re,im\n1,2,one,0\n",
    "w,p,re,im\n1,2,1\n",
    "w,p,re,im\n0,2,1,0\n",
))
def test_read_csv_rejects_malformed_files(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with raises(SpecParseError):
        read_csv(str(path))


def test_identity_has_norm_one():
    result = discrete_opnorm(np.eye(4), VARIABLE, restarts=2, max_iters=20)
    assert abs(result.value - 1.0) < 1e-10


def test_diagonal_norm_is_the_largest_entry():
    d = np.array([0.5, -3.0, 2.0 + 1j, 1.0])
    result = discrete_opnorm(np.diag(d), VARIABLE, restarts=2, max_iters=20)
    assert abs(result.value - 3.0) < 1e-8
    assert abs(discrete_luxemburg(result.witness, VARIABLE) - 1.0) < 1e-10


def test_hilbert_spaces_use_the_singular_value():
    generator = np.random.RandomState(7)
    A = generator.standard_normal((8, 8)) + 1j * generator.standard_normal((8, 8))
    largest = np.linalg.svd(A, compute_uv=False)[0]
    space = DiscreteSpace.constant(8, 2.0)
    exact = discrete_opnorm(A, space)
    assert exact.exact
    assert abs(exact.value - largest) < 1e-10 * largest
    searched = discrete_opnorm(A, space, restarts=2, max_iters=50, use_svd=False)
    assert not searched.exact
    assert abs(searched.value - largest) < 1e-8 * largest


def test_search_lower_bound_is_attained_by_its_witness():
    generator = np.random.RandomState(11)
    A = generator.standard_normal((4, 4))
    result = discrete_opnorm(A, VARIABLE, restarts=3, max_iters=50)
    ratio = discrete_luxemburg(A @ result.witness, VARIABLE) / discrete_luxemburg(result.witness, VARIABLE)
    assert abs(ratio - result.value) < 1e-9 * result.value


def test_opnorm_budgets():
    with raises(BudgetExceeded):
        discrete_opnorm(np.eye(65), DiscreteSpace.constant(65, 3.0))
    with raises(BudgetZero):
        discrete_opnorm(np.eye(4), VARIABLE, max_iters=0)
    with raises(ValueError):
        discrete_opnorm(np.ones((3, 4)), VARIABLE)


def test_interpolation_constant():
    assert interpolation_constant(DiscreteSpace.constant(2, 2.0), DiscreteSpace.constant(2, 4.0)) == 1.0
    assert interpolation_constant(VARIABLE, DiscreteSpace.constant(4, 4.0)) == 4.0


def test_riesz_thorin_on_a_diagonal_matrix():
    A = np.diag([1.0, -2.0, 0.5j])
    result = check_riesz_thorin(
        A, DiscreteSpace.constant(3, 2.0), DiscreteSpace.constant(3, 4.0), (0.25, 0.5, 0.75),
        restarts=1, max_iters=20
    )
    assert len(result.rows) == 3
    assert all(row.passed for row in result.rows)
    assert abs(result.max_ratio - 1.0) < 1e-8
    assert result.rows[0].check == "riesz-thorin[theta=0.25]"


def test_dft_model_of_a_constant_symbol():
    model = DftModel(8, 4.0)
    A = model.matrix(model.samples(Symbol.constant(2.0 - 1j)))
    assert np.max(np.abs(A - (2.0 - 1j) * np.eye(8))) < 1e-12
    assert model.space(ConstantExponent(3.0)).dimension == 8


def test_dft_modes_are_eigenvectors():
    model = DftModel(8, 4.0)
    samples = model.samples(sgn())
    A = model.matrix(samples)
    for k, mode in enumerate(model.modes):
        assert np.max(np.abs(A @ mode - samples[k] * mode)) < 1e-12


def test_dft_model_needs_an_even_size():
    with raises(ValueError):
        DftModel(7, 4.0)


def test_report_sorts_and_splits_rows(tmp_path):
    rows = [
        SuiteRow("b@2", Check.EMBEDDING.value, 1.0, 2.0),
        SuiteRow("a@2", Check.STECHKIN.value, 3.0, 2.0),
        SuiteRow("a@2", Check.EMBEDDING_TARGET.value, 3.0, 2.0, hard=False),
    ]
    report = SuiteReport.assemble(rows)
    assert [row.case_id for row in report.rows] == ["a@2", "a@2", "b@2"]
    assert [row.check for row in report.violations] == ["stechkin"]
    assert [row.check for row in report.misses] == ["embedding-target"]
    assert not report.ok
    assert report.rows[2].margin == 1.0

    path = tmp_path / "report.csv"
    report.write_csv(str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "case_id,check,lhs,rhs,margin,pass,hard"
    assert len(lines) == 4


def small_config(symbols, exponents, s_bounds=None, **budget):
    values = {"size": 8, "mollification_symbols": 0, "restarts": 1, "max_iters": 20}
    values.update(budget)
    return SuiteConfig(0, symbols, exponents, s_bounds or {}, **values)


def test_case_ids():
    config = small_config({"one": Symbol.constant(1.0), "sgn": sgn()}, {"2": ConstantExponent(2.0)})
    ids = case_ids(config)
    assert ids["sgn@2"] == 1
    assert ids.inverse[0] == "one@2"


def test_suite_config_rejects_unknown_keys():
    with raises(ConfigError):
        SuiteConfig.from_dict({"sizes": 8}, seed=0)
    with raises(ConfigError):
        SuiteConfig.from_dict({"interpolation": {"dimension": 4}}, seed=0)


def test_suite_config_s_bounds():
    config = SuiteConfig.default()
    assert config.s_bound("pwl-a") == 2.0
    assert abs(config.s_bound("3") - math.sqrt(3.0)) < 1e-12
    assert small_config({}, {"pwl": config.exponents["pwl-a"]}).s_bound("pwl") is None


def test_small_property_suite_passes():
    config = small_config(
        {"one": Symbol.constant(1.0, name="one"), "sgn": sgn()},
        {"2": ConstantExponent(2.0), "3": ConstantExponent(3.0)}
    )
    report = run_property_suite(config, threads=1)
    assert report.ok
    assert {row.case_id for row in report.rows} == {"one@2", "one@3", "sgn@2", "sgn@3"}
    assert set(report.diagnostics["cases"]) == {"one@2", "one@3", "sgn@2", "sgn@3"}


def test_too_small_s_bound_is_a_violation():
    config = small_config({"one": Symbol.constant(1.0, name="one")}, {"3": ConstantExponent(3.0)}, {"3": 0.5})
    report = run_property_suite(config, threads=1)
    assert [row.check for row in report.violations] == [Check.STECHKIN.value]


def test_empty_suite():
    report = run_property_suite(small_config({}, {}), threads=1)
    assert report.rows == ()
    assert report.ok


def test_convergence_sizes_are_diagnostics_only():
    config = small_config({"one": Symbol.constant(1.0, name="one")}, {"3": ConstantExponent(3.0)},
                          convergence_sizes=(4, 16))
    report = run_property_suite(config, threads=1)
    assert set(report.diagnostics["cases"]["one@3"]["convergence"]) == {"4", "16"}


@mark.slow
@mark.parametrize("variable", (False, True))
def test_riesz_thorin_corpus(variable):
    report = run_riesz_thorin_corpus(count=10, size=6, variable=variable, restarts=8, max_iters=100, threads=2)
    assert report.ok
    assert len(report.rows) == 30


@mark.slow
def test_mollification_check_on_default_symbols():
    symbols = SuiteConfig.default().symbols
    config = small_config(
        {name: symbols[name] for name in ("lorentzian", "atan", "chi[-1,1]")},
        {"2": ConstantExponent(2.0), "3": ConstantExponent(3.0)},
        size=16, mollification_size=32, mollification_symbols=3, restarts=2, max_iters=50
    )
    report = run_property_suite(config, threads=2)
    assert report.ok
    assert any(row.check.startswith(Check.MOLLIFICATION.value) for row in report.rows)


@mark.slow
@mark.parametrize("variable", (False, True))
def test_riesz_thorin_corpus_at_full_size(variable):
    report = run_riesz_thorin_corpus(variable=variable)
    assert report.ok
    assert len(report.rows) == 300
    label = "variable" if variable else "constant"
    assert report.diagnostics[f"riesz_thorin_{label}_count"] == 100


@mark.slow
def test_default_suite_at_full_size():
    config = SuiteConfig.default()
    assert (len(config.symbols), len(config.exponents)) == (20, 6)
    assert (config.mollification_size, config.mollification_symbols, len(config.deltas)) == (64, 10, 4)
    report = run_property_suite(config)
    assert report.ok
    assert len(report.diagnostics["cases"]) == 120
    mollified = [
        name for name in list(config.symbols)[:config.mollification_symbols]
        if isinstance(config.symbols[name], Symbol)
    ]
    rows = [row for row in report.rows if row.check.startswith(Check.MOLLIFICATION.value)]
    assert len(rows) == len(mollified) * len(config.exponents) * len(config.deltas)
    assert any(row.check == Check.STECHKIN.value for row in report.rows)
