"""Finite-model checks of the embedding, mollification, Stechkin and
interpolation inequalities on DFT multiplier matrices and random matrices.
"""
import csv
import math

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from bidict import bidict

from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import ConfigError, UnboundedVariation
from vlex_multipliers.exponent.VariableExponent import ConstantExponent, VariableExponent
from vlex_multipliers.oracle.DiscreteSpace import DiscreteSpace
from vlex_multipliers.oracle.opnorm import OpnormResult, discrete_opnorm
from vlex_multipliers.symbols.MollifiedSymbol import MollifiedSymbol
from vlex_multipliers.symbols.Symbol import MultiplierSymbol, Symbol
from vlex_multipliers.symbols.constructions import (
    blaschke_rational,
    jump_killer_infinity,
    psi_n,
    sgn,
    unit_step
)
from vlex_multipliers.symbols.norms import vnorm
from vlex_multipliers.transform.estimates import default_s_bound
from vlex_multipliers.transform.fourier import sample_symbol
from vlex_multipliers.utils import get_logger, run_parallel

INF = math.inf

EMBEDDING_TOLERANCE = 1e-6
EMBEDDING_TARGET = 0.02
MOLLIFICATION_TOLERANCE = 0.01
STECHKIN_SLACK = 1e-6
INTERPOLATION_TOLERANCE = 1e-6
CONSISTENCY_TOLERANCE = 0.05
CONSTANT_EXPONENT_CONSTANT = 1.0
VARIABLE_EXPONENT_CONSTANT = 4.0


class Check(Enum):
    EMBEDDING = "embedding"
    EMBEDDING_TARGET = "embedding-target"
    MOLLIFICATION = "mollification"
    STECHKIN = "stechkin"
    RIESZ_THORIN = "riesz-thorin"
    CONSISTENCY = "consistency"


CSV_COLUMNS = ("case_id", "check", "lhs", "rhs", "margin", "pass", "hard")


@dataclass(frozen=True)
class SuiteRow:
    """One inequality lhs <= rhs evaluated on one case.

    Attributes:
        case_id: e.g. ``"sgn@3"`` or ``"rt-constant[007]"``
        check: check name, with its parameter where there is one
        lhs: left-hand side
        rhs: right-hand side including its tolerance
        hard: a failing hard row is a violation, a failing soft row only a miss
    """
    case_id: str
    check: str
    lhs: float
    rhs: float
    hard: bool = True

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case_id": self.case_id,
            "check": self.check,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
            "hard": self.hard,
        }


@dataclass(frozen=True)
class SuiteReport:
    """Rows sorted by case id and check, plus diagnostics that are recorded
    but never asserted.
    """
    rows: Tuple[SuiteRow, ...]
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def assemble(cls, rows: Sequence[SuiteRow], diagnostics: Optional[Dict[str, Any]] = None) -> "SuiteReport":
        ordered = tuple(sorted(rows, key=lambda row: (row.case_id, row.check)))
        return cls(ordered, dict(diagnostics or {}))

    @property
    def violations(self) -> List[SuiteRow]:
        return [row for row in self.rows if row.hard and not row.passed]

    @property
    def misses(self) -> List[SuiteRow]:
        return [row for row in self.rows if not row.hard and not row.passed]

    @property
    def ok(self) -> bool:
        return not self.violations

    def merged(self, other: "SuiteReport") -> "SuiteReport":
        diagnostics = dict(self.diagnostics)
        diagnostics.update(other.diagnostics)
        return SuiteReport.assemble(self.rows + other.rows, diagnostics)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "violations": len(self.violations),
            "misses": len(self.misses),
            "diagnostics": self.diagnostics,
        }

    def write_csv(self, path: str):
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow([
                    row.case_id, row.check, repr(row.lhs), repr(row.rhs),
                    repr(row.margin), int(row.passed), int(row.hard)
                ])


# -- interpolation ----------------------------------------------------------------

@dataclass(frozen=True)
class InterpolationResult:
    """Rows of one Riesz-Thorin check and the largest observed ratio
    ||A||_theta / (||A||_0^theta ||A||_1^(1-theta))."""
    rows: Tuple[SuiteRow, ...]
    constant: float
    max_ratio: float


def interpolation_constant(space0: DiscreteSpace, space1: DiscreteSpace) -> float:
    if space0.is_constant and space1.is_constant:
        return CONSTANT_EXPONENT_CONSTANT
    return VARIABLE_EXPONENT_CONSTANT


def check_riesz_thorin(
        A,
        space0: DiscreteSpace,
        space1: DiscreteSpace,
        thetas: Sequence[float],
        constant: Optional[float] = None,
        case_id: str = "matrix",
        restarts: Optional[int] = None,
        max_iters: Optional[int] = None,
        seed: int = 0,
        threads: int = 1
    ) -> InterpolationResult:
    """Checks ||A||_{p_theta} <= C ||A||_{p0}^theta ||A||_{p1}^(1-theta)
    with 1/p_theta = theta/p0 + (1-theta)/p1 per index.

    The endpoint norms are lower bounds, so they are computed a second time
    with every witness found so far as an extra start.

    :param constant: C; 1 for two constant exponent vectors, 4 otherwise
    :return: one row per theta
    """
    A = np.asarray(A, dtype=complex)
    if constant is None:
        constant = interpolation_constant(space0, space1)

    def norm(space: DiscreteSpace, offset: int, extra=()) -> OpnormResult:
        return discrete_opnorm(
            A, space, restarts=restarts, max_iters=max_iters, seed=seed + offset,
            extra_starts=extra, threads=threads
        )

    end0, end1 = norm(space0, 0), norm(space1, 1)
    middle = [norm(space0.interpolated(space1, theta), 2 + i) for i, theta in enumerate(thetas)]
    witnesses = [end0.witness, end1.witness] + [result.witness for result in middle]
    value0 = max(end0.value, norm(space0, 0, witnesses).value)
    value1 = max(end1.value, norm(space1, 1, witnesses).value)

    rows, max_ratio = [], 0.0
    for theta, result in zip(thetas, middle):
        bound = value0 ** theta * value1 ** (1.0 - theta)
        if bound > 0.0:
            max_ratio = max(max_ratio, result.value / bound)
        rows.append(SuiteRow(
            case_id,
            f"{Check.RIESZ_THORIN.value}[theta={theta:g}]",
            result.value,
            constant * bound * (1.0 + INTERPOLATION_TOLERANCE)
        ))
    return InterpolationResult(tuple(rows), constant, max_ratio)


def _corpus_case(
        k: int,
        size: int,
        p0: float,
        p1: float,
        thetas: Sequence[float],
        seed: int,
        variable: bool,
        restarts: Optional[int],
        max_iters: Optional[int]
    ) -> InterpolationResult:
    generator = np.random.RandomState(seed + k)
    A = generator.standard_normal((size, size)) + 1j * generator.standard_normal((size, size))
    if variable:
        space0 = DiscreteSpace(np.ones(size), generator.uniform(1.5, 3.0, size))
        space1 = DiscreteSpace(np.ones(size), generator.uniform(2.0, 5.0, size))
        label = "rt-variable"
    else:
        space0 = DiscreteSpace.constant(size, p0)
        space1 = DiscreteSpace.constant(size, p1)
        label = "rt-constant"
    return check_riesz_thorin(
        A, space0, space1, thetas, case_id=f"{label}[{k:03d}]",
        restarts=restarts, max_iters=max_iters, seed=seed + k
    )


def run_riesz_thorin_corpus(
        count: int = 100,
        size: int = 8,
        p0: float = 2.0,
        p1: float = 4.0,
        thetas: Sequence[float] = (0.25, 0.5, 0.75),
        seed: int = 0,
        variable: bool = False,
        restarts: Optional[int] = None,
        max_iters: Optional[int] = None,
        threads: Optional[int] = None
    ) -> SuiteReport:
    """Riesz-Thorin checks on ``count`` random complex matrices drawn with
    seeds seed, seed + 1, ... Variable corpora draw exponent vectors in
    [1.5, 3] and [2, 5] and use the constant 4.
    """
    if threads is None:
        threads = get_defaults().threads
    results = run_parallel(
        [
            lambda k=k: _corpus_case(k, size, p0, p1, thetas, seed, variable, restarts, max_iters)
            for k in range(count)
        ],
        threads
    )
    rows = [row for result in results for row in result.rows]
    label = "variable" if variable else "constant"
    diagnostics = {
        f"riesz_thorin_{label}_max_ratio": max([r.max_ratio for r in results], default=0.0),
        f"riesz_thorin_{label}_count": count,
    }
    get_logger(__name__).debug(
        f"Riesz-Thorin corpus ({label}): {count} matrices, max ratio {diagnostics[f'riesz_thorin_{label}_max_ratio']:.6g}"
    )
    return SuiteReport.assemble(rows, diagnostics)


# -- DFT multiplier model ----------------------------------------------------------

class DftModel:
    """Cyclic model of W^0(a) on n points.

    Frequencies x_k = -F + k 2F/n, times t_j = (j - n/2) h with
    h = 2 pi / (n * 2F/n) = pi / F. The matrix U_kj = exp(-i x_k t_j)/sqrt(n)
    is unitary and A = U^H diag(a(x_k)) U. Each time node carries weight h.

    Attributes:
        size: n
        frequency_half_width: F
    """

    def __init__(self, size: int, frequency_half_width: float):
        if size < 2 or size % 2:
            raise ValueError(f"DFT model needs an even size >= 2, got {size}")
        self.size = size
        self.frequency_half_width = frequency_half_width
        spacing = 2.0 * frequency_half_width / size
        self.frequencies = -frequency_half_width + spacing * np.arange(size)
        self.step = 2.0 * math.pi / (size * spacing)
        self.times = (np.arange(size) - size / 2) * self.step
        self.unitary = np.exp(-1j * np.outer(self.frequencies, self.times)) / math.sqrt(size)

    def samples(self, a: MultiplierSymbol) -> np.ndarray:
        return sample_symbol(a, self.frequencies)

    def matrix(self, samples: np.ndarray) -> np.ndarray:
        return self.unitary.conj().T @ (np.asarray(samples, dtype=complex)[:, None] * self.unitary)

    @property
    def modes(self) -> List[np.ndarray]:
        """Eigenvectors of every model matrix, one per frequency."""
        return [self.unitary[k].conj() for k in range(self.size)]

    def space(self, p: VariableExponent) -> DiscreteSpace:
        return DiscreteSpace.from_exponent(p, self.times, self.step)


# -- suite configuration ---------------------------------------------------------------

class SuiteKeys():
    SIZE = "size"
    MOLLIFICATION_SIZE = "mollification_size"
    MOLLIFICATION_SYMBOLS = "mollification_symbols"
    DELTAS = "deltas"
    FREQUENCY_HALF_WIDTH = "frequency_half_width"
    RESTARTS = "restarts"
    MAX_ITERS = "max_iters"
    CONVERGENCE_SIZES = "convergence_sizes"
    INTERPOLATION = "interpolation"
    COUNT = "count"
    P0 = "p0"
    P1 = "p1"
    THETAS = "thetas"
    VARIABLE = "variable"


SUITE_KEYS = {
    SuiteKeys.SIZE, SuiteKeys.MOLLIFICATION_SIZE, SuiteKeys.MOLLIFICATION_SYMBOLS,
    SuiteKeys.DELTAS, SuiteKeys.FREQUENCY_HALF_WIDTH, SuiteKeys.RESTARTS,
    SuiteKeys.MAX_ITERS, SuiteKeys.CONVERGENCE_SIZES, SuiteKeys.INTERPOLATION,
}
INTERPOLATION_KEYS = {
    SuiteKeys.COUNT, SuiteKeys.SIZE, SuiteKeys.P0, SuiteKeys.P1, SuiteKeys.THETAS, SuiteKeys.VARIABLE,
}


def default_symbols() -> Dict[str, MultiplierSymbol]:
    zero, one = 0.0, 1.0
    symbols = [
        Symbol.constant(1.0, name="one"),
        sgn(),
        Symbol.from_spec({"expr": "2/(1+x^2)", "name": "lorentzian",
                          "wiener": {"constant": 0, "density": "exp(-abs(x))"}}),
        Symbol.from_expression("exp(-x^2)", name="gaussian"),
        Symbol.from_expression("atan(x)", name="atan"),
        unit_step(0.0).renamed("step"),
        Symbol.piecewise([-INF, -1.0, 1.0, INF], [zero, one, zero], name="chi[-1,1]"),
        Symbol.from_expression("2/(1+exp(-2*x))-1", name="tanh"),
        Symbol.from_expression("2/(exp(x)+exp(-x))", name="sech"),
        blaschke_rational(1),
        blaschke_rational(2),
        psi_n(2),
        Symbol.piecewise([-INF, -1.0, 0.0, 1.0, INF], ["0", "1+x", "1-x", "0"], name="hat"),
        jump_killer_infinity((-1.0, 1.0)),
        Symbol.from_expression("x/(1+x^2)", name="x/(1+x^2)"),
        Symbol.from_expression("exp(-abs(x))", name="exp(-|x|)"),
        Symbol.from_expression("cos(x)/(1+x^2)", name="cos/(1+x^2)"),
        Symbol.from_expression("exp(I*x)/(1+x^2)", name="exp(ix)/(1+x^2)"),
        Symbol.piecewise([-INF, -1.0, 1.0, INF], [zero, one, -one], name="two-step"),
        Symbol.from_expression("sin(x)*exp(-x^2)", name="sin*gaussian"),
    ]
    return {symbol.name: symbol for symbol in symbols}


def default_exponents() -> Dict[str, VariableExponent]:
    exponents = {name: ConstantExponent(float(name)) for name in ("1.5", "2", "3", "4")}
    exponents["pwl-a"] = VariableExponent.from_spec(
        {"kind": "pwl", "knots": [[-2.0, 1.5], [2.0, 3.0]], "left_tail": 1.5, "right_tail": 3.0}
    )
    exponents["pwl-b"] = VariableExponent.from_spec(
        {"kind": "pwl", "knots": [[-1.0, 3.0], [0.0, 2.0], [1.0, 3.0]], "left_tail": 3.0, "right_tail": 3.0}
    )
    return exponents


def default_s_bounds() -> Dict[str, float]:
    return {"pwl-a": 2.0, "pwl-b": 2.0}


@dataclass(frozen=True, eq=False)
class SuiteConfig:
    """Cases and budgets of the property suite.

    Attributes:
        seed: case i uses seed + i
        symbols: name -> symbol
        exponents: name -> exponent
        s_bounds: exponent name -> bound for the norm of S; constant
            exponents default to the classical value. Values are used as
            given, also below 1.
        size: model size of the embedding and Stechkin checks
        mollification_size: model size of the mollification check
        mollification_symbols: the first k symbols take part in it
        deltas: mollification widths
        frequency_half_width: F of the DFT model
        restarts, max_iters: ascent budget per operator norm
        convergence_sizes: extra model sizes whose norms are recorded as
            diagnostics
        interpolation_*: Riesz-Thorin corpus run with the suite; a count of
            0 disables it
    """
    seed: int
    symbols: Dict[str, MultiplierSymbol]
    exponents: Dict[str, VariableExponent]
    s_bounds: Dict[str, float]
    size: int = 32
    mollification_size: int = 64
    mollification_symbols: int = 10
    deltas: Tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    frequency_half_width: float = 8.0
    restarts: int = 4
    max_iters: int = 100
    convergence_sizes: Tuple[int, ...] = ()
    interpolation_count: int = 0
    interpolation_size: int = 8
    interpolation_p0: float = 2.0
    interpolation_p1: float = 4.0
    interpolation_thetas: Tuple[float, ...] = (0.25, 0.5, 0.75)
    interpolation_variable: bool = True

    @classmethod
    def default(cls, seed: int = 0) -> "SuiteConfig":
        return cls(seed, default_symbols(), default_exponents(), default_s_bounds())

    @classmethod
    def from_dict(
            cls,
            raw: Dict[str, Any],
            seed: int,
            symbols: Optional[Dict[str, MultiplierSymbol]] = None,
            exponents: Optional[Dict[str, VariableExponent]] = None,
            s_bounds: Optional[Dict[str, float]] = None
        ) -> "SuiteConfig":
        """Budgets from ``raw``; cases from the arguments, the default suite
        where an argument is None.

        :raises ConfigError: on unknown keys or malformed values
        """
        unknown = set(raw) - SUITE_KEYS
        if unknown:
            raise ConfigError(f"Unknown keys in suite config: {sorted(unknown)}")
        interpolation = raw.get(SuiteKeys.INTERPOLATION, {})
        if not isinstance(interpolation, dict) or set(interpolation) - INTERPOLATION_KEYS:
            raise ConfigError(f"Malformed interpolation config: {interpolation!r}")
        base = cls.default(seed)
        try:
            return cls(
                seed=int(seed),
                symbols=base.symbols if symbols is None else dict(symbols),
                exponents=base.exponents if exponents is None else dict(exponents),
                s_bounds=base.s_bounds if s_bounds is None else {k: float(v) for k, v in s_bounds.items()},
                size=int(raw.get(SuiteKeys.SIZE, base.size)),
                mollification_size=int(raw.get(SuiteKeys.MOLLIFICATION_SIZE, base.mollification_size)),
                mollification_symbols=int(raw.get(SuiteKeys.MOLLIFICATION_SYMBOLS, base.mollification_symbols)),
                deltas=tuple(float(d) for d in raw.get(SuiteKeys.DELTAS, base.deltas)),
                frequency_half_width=float(raw.get(SuiteKeys.FREQUENCY_HALF_WIDTH, base.frequency_half_width)),
                restarts=int(raw.get(SuiteKeys.RESTARTS, base.restarts)),
                max_iters=int(raw.get(SuiteKeys.MAX_ITERS, base.max_iters)),
                convergence_sizes=tuple(int(n) for n in raw.get(SuiteKeys.CONVERGENCE_SIZES, ())),
                interpolation_count=int(interpolation.get(SuiteKeys.COUNT, base.interpolation_count)),
                interpolation_size=int(interpolation.get(SuiteKeys.SIZE, base.interpolation_size)),
                interpolation_p0=float(interpolation.get(SuiteKeys.P0, base.interpolation_p0)),
                interpolation_p1=float(interpolation.get(SuiteKeys.P1, base.interpolation_p1)),
                interpolation_thetas=tuple(float(t) for t in interpolation.get(SuiteKeys.THETAS, base.interpolation_thetas)),
                interpolation_variable=bool(interpolation.get(SuiteKeys.VARIABLE, base.interpolation_variable)),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Malformed suite config: {e}") from e

    def s_bound(self, exponent_name: str) -> Optional[float]:
        if exponent_name in self.s_bounds:
            return self.s_bounds[exponent_name]
        p = self.exponents[exponent_name]
        if isinstance(p, ConstantExponent) or p.is_constant:
            return default_s_bound(p.p_minus)
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "symbols": {name: symbol.spec() for name, symbol in self.symbols.items()},
            "exponents": {name: p.spec() for name, p in self.exponents.items()},
            "s_bounds": dict(self.s_bounds),
            SuiteKeys.SIZE: self.size,
            SuiteKeys.MOLLIFICATION_SIZE: self.mollification_size,
            SuiteKeys.MOLLIFICATION_SYMBOLS: self.mollification_symbols,
            SuiteKeys.DELTAS: list(self.deltas),
            SuiteKeys.FREQUENCY_HALF_WIDTH: self.frequency_half_width,
            SuiteKeys.RESTARTS: self.restarts,
            SuiteKeys.MAX_ITERS: self.max_iters,
            SuiteKeys.CONVERGENCE_SIZES: list(self.convergence_sizes),
            SuiteKeys.INTERPOLATION: {
                SuiteKeys.COUNT: self.interpolation_count,
                SuiteKeys.SIZE: self.interpolation_size,
                SuiteKeys.P0: self.interpolation_p0,
                SuiteKeys.P1: self.interpolation_p1,
                SuiteKeys.THETAS: list(self.interpolation_thetas),
                SuiteKeys.VARIABLE: self.interpolation_variable,
            },
        }


def case_ids(config: SuiteConfig) -> bidict:
    """Case id ``"<symbol>@<exponent>"`` <-> case index."""
    ids = bidict()
    for symbol_name in config.symbols:
        for exponent_name in config.exponents:
            ids[f"{symbol_name}@{exponent_name}"] = len(ids)
    return ids


# -- property suite -----------------------------------------------------------------

class SuiteCase:
    """All checks of one symbol on one exponent."""

    def __init__(self, config: SuiteConfig, case_id: str, index: int):
        self.config = config
        self.case_id = case_id
        self.seed = config.seed + index
        symbol_name, exponent_name = case_id.split("@", 1)
        self.symbol = config.symbols[symbol_name]
        self.exponent_name = exponent_name
        self.p = config.exponents[exponent_name]
        self.mollify = list(config.symbols).index(symbol_name) < config.mollification_symbols

    def _opnorm(self, model: DftModel, samples: np.ndarray, extra=()) -> OpnormResult:
        return discrete_opnorm(
            model.matrix(samples),
            model.space(self.p),
            restarts=self.config.restarts,
            max_iters=self.config.max_iters,
            seed=self.seed,
            extra_starts=list(model.modes) + list(extra),
            threads=1
        )

    def embedding_rows(self, target: float, opnorm: float) -> List[SuiteRow]:
        rows = [SuiteRow(self.case_id, Check.EMBEDDING.value, target, opnorm * (1.0 + EMBEDDING_TOLERANCE))]
        if not (self.p.is_constant and self.p.p_minus == 2.0):
            rows.append(SuiteRow(
                self.case_id, Check.EMBEDDING_TARGET.value, target * (1.0 - EMBEDDING_TARGET), opnorm, hard=False
            ))
        return rows

    def stechkin_rows(self, opnorm: float) -> List[SuiteRow]:
        s = self.config.s_bound(self.exponent_name)
        if s is None:
            get_logger(__name__).debug(f"Case {self.case_id}: no bound for S, Stechkin check skipped")
            return []
        try:
            variation_norm = vnorm(self.symbol)
        except UnboundedVariation:
            get_logger(__name__).debug(f"Case {self.case_id}: unbounded variation, Stechkin check skipped")
            return []
        return [SuiteRow(self.case_id, Check.STECHKIN.value, opnorm, s * variation_norm + STECHKIN_SLACK)]

    def mollification_rows(self) -> List[SuiteRow]:
        model = DftModel(self.config.mollification_size, self.config.frequency_half_width)
        base_samples = model.samples(self.symbol)
        base = self._opnorm(model, base_samples)
        mollified = []
        for delta in self.config.deltas:
            symbol = MollifiedSymbol(self.symbol, delta)
            mollified.append((delta, self._opnorm(model, model.samples(symbol), [base.witness])))
        seeded = self._opnorm(model, base_samples, [result.witness for _, result in mollified])
        reference = max(base.value, seeded.value)
        return [
            SuiteRow(
                self.case_id,
                f"{Check.MOLLIFICATION.value}[delta={delta:g}]",
                result.value,
                reference * (1.0 + MOLLIFICATION_TOLERANCE)
            )
            for delta, result in mollified
        ]

    def run(self) -> Tuple[List[SuiteRow], Dict[str, Any]]:
        model = DftModel(self.config.size, self.config.frequency_half_width)
        samples = model.samples(self.symbol)
        result = self._opnorm(model, samples)
        target = float(np.max(np.abs(samples)))
        rows = self.embedding_rows(target, result.value) + self.stechkin_rows(result.value)
        if self.mollify and isinstance(self.symbol, Symbol):
            rows.extend(self.mollification_rows())

        diagnostics = {"opnorm": result.value, "sup": target, "start": result.start}
        if self.config.convergence_sizes:
            convergence = {}
            for size in self.config.convergence_sizes:
                other = DftModel(size, self.config.frequency_half_width)
                convergence[str(size)] = self._opnorm(other, other.samples(self.symbol)).value
            diagnostics["convergence"] = convergence
        get_logger(__name__).debug(
            f"Case {self.case_id}: opnorm {result.value:.9g}, sup {target:.9g}, "
            f"{sum(not row.passed for row in rows)} failing rows"
        )
        return rows, diagnostics


def run_property_suite(config: SuiteConfig, threads: Optional[int] = None) -> SuiteReport:
    """Runs the embedding, Stechkin and mollification checks on every
    symbol and exponent pair, then the Riesz-Thorin corpora.

    Failures are collected in the report, never raised. An empty suite
    yields an empty report.

    :param config: cases and budgets
    :param threads: worker cap, '[parallel] threads' by default
    :return: report sorted by case id
    """
    if threads is None:
        threads = get_defaults().threads
    ids = case_ids(config)
    cases = [SuiteCase(config, case_id, index) for case_id, index in ids.items()]
    results = run_parallel([case.run for case in cases], threads)

    rows = [row for case_rows, _ in results for row in case_rows]
    diagnostics = {"cases": {case.case_id: info for case, (_, info) in zip(cases, results)}}
    report = SuiteReport.assemble(rows, diagnostics)

    if config.interpolation_count > 0:
        for variable in (False, True) if config.interpolation_variable else (False,):
            report = report.merged(run_riesz_thorin_corpus(
                count=config.interpolation_count,
                size=config.interpolation_size,
                p0=config.interpolation_p0,
                p1=config.interpolation_p1,
                thetas=config.interpolation_thetas,
                seed=config.seed + len(ids),
                variable=variable,
                restarts=config.restarts * 8,
                max_iters=config.max_iters * 4,
                threads=threads
            ))
    get_logger(__name__).debug(
        f"Property suite: {len(ids)} cases, {len(report.rows)} rows, {len(report.violations)} violations"
    )
    return report


def discrete_consistency(
        target: MultiplierSymbol,
        approximant: MultiplierSymbol,
        certified_total: float,
        p: VariableExponent,
        size: int = 64,
        frequency_half_width: float = 8.0,
        case_id: str = "certificate",
        seed: int = 0
    ) -> SuiteRow:
    """Row opnorm(W^0(target - approximant)) <= certified_total * 1.05 on
    the DFT model; the certified bound must dominate the finite model."""
    model = DftModel(size, frequency_half_width)
    difference = model.samples(target) - model.samples(approximant)
    result = discrete_opnorm(
        model.matrix(difference), model.space(p), seed=seed, extra_starts=model.modes, threads=1
    )
    return SuiteRow(case_id, Check.CONSISTENCY.value, result.value, certified_total * (1.0 + CONSISTENCY_TOLERANCE))
