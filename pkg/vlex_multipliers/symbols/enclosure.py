"""Outward rounded interval enclosures of closed-form symbol pieces.

Sampling a symbol misses whatever sits between the samples. The helpers here
evaluate a piece expression on whole cells [lower, upper] in interval
arithmetic, so sup |a| over a region, and the sup of |a^(k)| over many small
windows, come with bounds that hold between samples as well.
"""
import math
import operator
import functools

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
import sympy

from vlex_multipliers.errors import NotEnclosable
from vlex_multipliers.expressions import X
from vlex_multipliers.symbols.Symbol import Piece, Symbol
from vlex_multipliers.utils import get_logger

INITIAL_CELLS = 64
TAIL_DOUBLINGS = 62
MAX_ROUNDS = 80
MAX_CELLS = 8192
SUP_RTOL = 1e-4
SUP_ATOL = 1e-15
PERIODIC_LIMIT = 1e6
PERIODIC_SLACK = 1e-8


def _down(values):
    return np.nextafter(values, -np.inf)


def _up(values):
    return np.nextafter(values, np.inf)


@dataclass(frozen=True, eq=False)
class Interval:
    """Componentwise intervals [lower_i, upper_i] with outward rounding.

    A NaN in either end widens that component to the whole line.
    """
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def of(cls, lower, upper) -> "Interval":
        lower, upper = np.broadcast_arrays(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))
        invalid = np.isnan(lower) | np.isnan(upper)
        if np.any(invalid):
            lower = np.where(invalid, -np.inf, lower)
            upper = np.where(invalid, np.inf, upper)
        return cls(lower, upper)

    @classmethod
    def point(cls, value: float, shape) -> "Interval":
        return cls.of(np.full(shape, _down(value)), np.full(shape, _up(value)))

    def __add__(self, other: "Interval") -> "Interval":
        return Interval.of(_down(self.lower + other.lower), _up(self.upper + other.upper))

    def __neg__(self) -> "Interval":
        return Interval(-self.upper, -self.lower)

    def __sub__(self, other: "Interval") -> "Interval":
        return self + (-other)

    def __mul__(self, other: "Interval") -> "Interval":
        products = np.stack([
            self.lower * other.lower, self.lower * other.upper,
            self.upper * other.lower, self.upper * other.upper,
        ])
        # 0 * inf
        products = np.where(np.isnan(products), 0.0, products)
        return Interval.of(_down(products.min(axis=0)), _up(products.max(axis=0)))

    def reciprocal(self) -> "Interval":
        straddles = (self.lower <= 0.0) & (self.upper >= 0.0)
        lower = np.where(straddles, -np.inf, _down(1.0 / self.upper))
        upper = np.where(straddles, np.inf, _up(1.0 / self.lower))
        return Interval.of(lower, upper)

    def magnitude(self) -> "Interval":
        low = np.where(
            (self.lower <= 0.0) & (self.upper >= 0.0),
            0.0,
            np.minimum(np.abs(self.lower), np.abs(self.upper))
        )
        return Interval(low, np.maximum(np.abs(self.lower), np.abs(self.upper)))

    def power(self, exponent: int) -> "Interval":
        if exponent == 0:
            return Interval.point(1.0, self.lower.shape)
        if exponent < 0:
            return self.power(-exponent).reciprocal()
        if exponent % 2 == 0:
            modulus = self.magnitude()
            return Interval.of(
                _power_points(modulus.lower, exponent).lower,
                _power_points(modulus.upper, exponent).upper
            )
        return Interval.of(
            _power_points(self.lower, exponent).lower,
            _power_points(self.upper, exponent).upper
        )

    def real_power(self, exponent: float) -> "Interval":
        negative = self.upper < 0.0
        base = np.maximum(self.lower, 0.0)
        if exponent > 0:
            lower = _down(_down(base ** exponent))
            upper = _up(_up(self.upper ** exponent))
        else:
            lower = _down(_down(self.upper ** exponent))
            upper = _up(_up(base ** exponent))
        lower = np.where(np.isfinite(lower), np.maximum(lower, 0.0), 0.0)
        return Interval.of(np.where(negative, -np.inf, lower), np.where(negative, np.inf, upper))

    def _monotone(self, function: Callable) -> "Interval":
        return Interval.of(_down(_down(function(self.lower))), _up(_up(function(self.upper))))

    def exp(self) -> "Interval":
        result = self._monotone(np.exp)
        return Interval(np.maximum(result.lower, 0.0), result.upper)

    def atan(self) -> "Interval":
        return self._monotone(np.arctan)

    def log(self) -> "Interval":
        result = self._monotone(lambda v: np.log(np.maximum(v, 0.0)))
        outside = self.upper <= 0.0
        return Interval.of(np.where(outside, -np.inf, result.lower), np.where(outside, np.inf, result.upper))

    def _periodic(self, function: Callable, peak: float) -> "Interval":
        lower, upper = self.lower, self.upper
        ends = np.stack([function(lower), function(upper)])
        low = _down(_down(ends.min(axis=0)))
        high = _up(_up(ends.max(axis=0)))
        two_pi = 2.0 * math.pi
        wide = (
            ~np.isfinite(lower) | ~np.isfinite(upper) | (upper - lower >= two_pi)
            | (np.abs(lower) > PERIODIC_LIMIT) | (np.abs(upper) > PERIODIC_LIMIT)
        )
        first_peak = peak + two_pi * np.ceil((lower - peak - PERIODIC_SLACK) / two_pi)
        first_trough = peak + math.pi + two_pi * np.ceil((lower - peak - math.pi - PERIODIC_SLACK) / two_pi)
        high = np.where(wide | (first_peak <= upper + PERIODIC_SLACK), 1.0, np.minimum(high, 1.0))
        low = np.where(wide | (first_trough <= upper + PERIODIC_SLACK), -1.0, np.maximum(low, -1.0))
        return Interval.of(low, high)

    def sin(self) -> "Interval":
        return self._periodic(np.sin, 0.5 * math.pi)

    def cos(self) -> "Interval":
        return self._periodic(np.cos, 0.0)

    def step(self) -> "Interval":
        lower = np.where(self.lower > 0.0, 1.0, 0.0)
        upper = np.where(self.upper < 0.0, 0.0, 1.0)
        return Interval(lower, upper)

    def point_mass(self) -> "Interval":
        hits = (self.lower <= 0.0) & (self.upper >= 0.0)
        return Interval(np.where(hits, -np.inf, 0.0), np.where(hits, np.inf, 0.0))

    def sign(self) -> "Interval":
        lower = np.where(self.lower > 0.0, 1.0, np.where(self.lower < 0.0, -1.0, 0.0))
        upper = np.where(self.upper < 0.0, -1.0, np.where(self.upper > 0.0, 1.0, 0.0))
        return Interval(lower, upper)


def _power_points(values: np.ndarray, exponent: int) -> Interval:
    base = Interval(values, values)
    result = base
    for _ in range(exponent - 1):
        result = result * base
    return result


IntervalFunction = Callable[[Interval], Interval]

UNARY = (
    (sympy.exp, Interval.exp),
    (sympy.log, Interval.log),
    (sympy.sin, Interval.sin),
    (sympy.cos, Interval.cos),
    (sympy.atan, Interval.atan),
    (sympy.Abs, Interval.magnitude),
    (sympy.sign, Interval.sign),
    (sympy.Heaviside, Interval.step),
    (sympy.DiracDelta, Interval.point_mass),
)


def _constant(expr: sympy.Expr) -> IntervalFunction:
    try:
        value = complex(expr)
    except (TypeError, ValueError) as e:
        raise NotEnclosable(f"Constant {expr} has no numeric value") from e
    if value.imag != 0.0 or not math.isfinite(value.real):
        raise NotEnclosable(f"Constant {expr} is not a finite real number")
    return lambda cell: Interval.point(value.real, cell.lower.shape)


def _compile(expr: sympy.Expr) -> IntervalFunction:
    if expr == X:
        return lambda cell: cell
    if expr.is_number:
        return _constant(expr)
    args: List[IntervalFunction] = [_compile(arg) for arg in expr.args]
    if isinstance(expr, sympy.Add):
        return lambda cell: functools.reduce(operator.add, (f(cell) for f in args))
    if isinstance(expr, sympy.Mul):
        return lambda cell: functools.reduce(operator.mul, (f(cell) for f in args))
    if isinstance(expr, sympy.Pow):
        base, exponent = expr.args
        if exponent.is_Integer:
            return lambda cell: args[0](cell).power(int(exponent))
        if exponent.is_number:
            return lambda cell: args[0](cell).real_power(float(exponent))
        return lambda cell: (args[1](cell) * args[0](cell).log()).exp()
    for kind, method in UNARY:
        if isinstance(expr, kind):
            return lambda cell: method(args[0](cell))
    raise NotEnclosable(f"No interval rule for {type(expr).__name__} in {expr}")


@functools.lru_cache(maxsize=1024)
def modulus_enclosure(expr: sympy.Expr) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Compile expr into a function returning upper bounds of |expr| over the
    cells [lower_i, upper_i]. Complex expressions are split into real and
    imaginary parts.

    :raises NotEnclosable: expr uses a function without an interval rule
    """
    if expr.has(sympy.I):
        real, imaginary = sympy.expand_complex(expr).as_real_imag()
        parts = (_compile(real), _compile(imaginary))

        def modulus(cell: Interval) -> Interval:
            return (parts[0](cell).power(2) + parts[1](cell).power(2)).real_power(0.5)
    else:
        part = _compile(expr)

        def modulus(cell: Interval) -> Interval:
            return part(cell).magnitude()

    def upper_bounds(lower, upper) -> np.ndarray:
        with np.errstate(all="ignore"):
            bounds = modulus(Interval.of(lower, upper)).upper
        return np.where(np.isnan(bounds), np.inf, bounds)

    return upper_bounds


@dataclass(frozen=True)
class SupEnclosure:
    """sup |f| over a region: ``value`` is attained at ``argmax`` (None when
    no finite point was sampled), ``bound`` holds over the whole region."""
    value: float
    bound: float
    cells: int = 0
    argmax: Optional[float] = None


def _initial_cells(lower: float, upper: float) -> Tuple[np.ndarray, np.ndarray]:
    if math.isinf(lower) and math.isinf(upper):
        left, right = _initial_cells(-math.inf, 0.0), _initial_cells(0.0, math.inf)
        return np.concatenate([left[0], right[0]]), np.concatenate([left[1], right[1]])
    offsets = np.concatenate([[0.0], 2.0 ** np.arange(TAIL_DOUBLINGS + 1.0), [math.inf]])
    if math.isinf(upper):
        edges = lower + offsets
    elif math.isinf(lower):
        edges = (upper - offsets)[::-1]
    else:
        edges = np.linspace(lower, upper, INITIAL_CELLS + 1)
    return edges[:-1], edges[1:]


def _split(lower: np.ndarray, upper: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    with np.errstate(invalid="ignore"):
        middle = np.where(
            np.isinf(upper), lower + np.maximum(1.0, np.abs(lower)),
            np.where(np.isinf(lower), upper - np.maximum(1.0, np.abs(upper)), 0.5 * (lower + upper))
        )
    return np.concatenate([lower, middle]), np.concatenate([middle, upper])


def _sample(piece: Piece, points: np.ndarray) -> Tuple[float, Optional[float]]:
    points = points[np.isfinite(points)]
    if len(points) == 0:
        return 0.0, None
    with np.errstate(all="ignore"):
        values = np.abs(piece(points))
    values = np.where(np.isfinite(values), values, 0.0)
    index = int(np.argmax(values))
    return float(values[index]), float(points[index])


def piece_sup(piece: Piece, lower: float, upper: float, rtol: float = SUP_RTOL, atol: float = SUP_ATOL) -> SupEnclosure:
    """sup |piece| over the closure of (lower, upper) by branch and bound.

    Cells whose enclosure stays below the best sample up to rtol are
    discarded; the others are halved, infinite cells split at twice their
    finite end.
    """
    if piece.is_constant:
        value = abs(piece.constant_value)
        point = next((end for end in (lower, upper) if math.isfinite(end)), 0.0)
        return SupEnclosure(value, value, argmax=point)
    enclose = modulus_enclosure(piece.expr)
    lo, hi = _initial_cells(lower, upper)
    best, argmax = _sample(piece, np.concatenate([lo, hi]))

    def improve(candidate: Tuple[float, Optional[float]]):
        nonlocal best, argmax
        if candidate[0] > best:
            best, argmax = candidate

    for end in (lower, upper):
        if end in (piece.lower, piece.upper) and math.isfinite(end):
            value = piece.value_at(end)
            if value is not None and np.isfinite(value):
                improve((abs(value), end))
    settled, evaluated = 0.0, 0
    bounds = np.zeros(0)
    for _ in range(MAX_ROUNDS):
        bounds = enclose(lo, hi)
        evaluated += len(lo)
        keep = bounds > best + atol + rtol * best
        if np.any(~keep):
            settled = max(settled, float(np.max(bounds[~keep])))
        if not np.any(keep):
            return SupEnclosure(best, max(settled, best), evaluated, argmax)
        lo, hi, bounds = lo[keep], hi[keep], bounds[keep]
        if len(lo) > MAX_CELLS:
            break
        lo, hi = _split(lo, hi)
        improve(_sample(piece, hi[:len(hi) // 2]))
    bound = max(settled, best, float(np.max(bounds)) if len(bounds) else 0.0)
    get_logger(__name__).debug(
        f"Enclosure of |{piece.expr}| on [{lower}, {upper}] stopped at {len(lo)} cells: "
        f"value {best:.6g}, bound {bound:.6g}"
    )
    return SupEnclosure(best, bound, evaluated, argmax)


def _combine(parts) -> SupEnclosure:
    parts = list(parts)
    if not parts:
        return SupEnclosure(0.0, 0.0)
    best = max(parts, key=lambda part: part.value)
    return SupEnclosure(
        best.value, max(part.bound for part in parts), sum(part.cells for part in parts), best.argmax
    )


def symbol_sup(symbol: Symbol, lower: float, upper: float) -> SupEnclosure:
    """sup |symbol| over [lower, upper], which may have infinite ends.

    :raises NotEnclosable: no finite bound could be established
    """
    result = _combine(
        piece_sup(piece, max(lower, piece.lower), min(upper, piece.upper))
        for piece in symbol.pieces
        if max(lower, piece.lower) < min(upper, piece.upper)
    )
    if not math.isfinite(result.bound):
        raise NotEnclosable(f"No finite bound of |{symbol.name}| on [{lower}, {upper}]")
    return result


def tail_sup(symbol: Symbol, radius: float) -> SupEnclosure:
    """sup |symbol(x)| over |x| >= radius."""
    return _combine([symbol_sup(symbol, -math.inf, -radius), symbol_sup(symbol, radius, math.inf)])


def derivative_bounds(symbol: Symbol, order: int, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Upper bounds of sup |symbol^(order)| over each window [lower_i, upper_i],
    inf where no finite enclosure exists.

    Windows crossing breakpoints take the maximum over the pieces they meet;
    the jumps themselves are not included.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    out = np.zeros(lower.shape, dtype=float)
    for piece in symbol.pieces:
        left, right = np.maximum(lower, piece.lower), np.minimum(upper, piece.upper)
        inside = left <= right
        if not np.any(inside) or (piece.is_constant and order > 0):
            continue
        try:
            bounds = modulus_enclosure(piece.derivative_expr(order))(left[inside], right[inside])
        except NotEnclosable:
            bounds = np.full(int(np.sum(inside)), np.inf)
        out[inside] = np.maximum(out[inside], bounds)
    return out
