"""Sup, variation, Wiener and SO^3 norms of multiplier symbols."""
import math

from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from vlex_multipliers.errors import NotEnclosable, NotInSO3, NotInWienerForm, UnboundedVariation
from vlex_multipliers.expressions import X, compile_expression, finite_limit, parse_expression
from vlex_multipliers.grid.GridFunction import GridFunction
from vlex_multipliers.symbols.MollifiedSymbol import MollifiedSymbol
from vlex_multipliers.symbols.Symbol import MultiplierSymbol, Piece, Symbol
from vlex_multipliers.symbols.enclosure import modulus_enclosure, piece_sup
from vlex_multipliers.utils import get_logger

VARIATION_EPSREL = 1e-8
VARIATION_EPSABS = 1e-13
VARIATION_STOP = 1e-9
MAX_ANNULI = 60
PIECE_SAMPLES = 2049
TAIL_EXPONENT = 60.0
SO3_ORDER = 3
SO3_TOLERANCE = 1e-6
OSC_SAMPLES = 513
PEAK_RTOL = 1e-2


def _piece_nodes(lower: float, upper: float, count: int = PIECE_SAMPLES) -> np.ndarray:
    """Interior sample nodes of (lower, upper), geometric towards infinite ends."""
    tail = 2.0 ** np.linspace(-8.0, TAIL_EXPONENT, count)
    if math.isinf(lower) and math.isinf(upper):
        core = np.linspace(-64.0, 64.0, count)
        return np.concatenate([-tail[::-1], core, tail])
    if math.isinf(lower):
        return upper - tail[::-1]
    if math.isinf(upper):
        return lower + tail
    return np.linspace(lower, upper, count)[1:-1]


def _symbol_nodes(symbol: MultiplierSymbol, count: int = PIECE_SAMPLES) -> np.ndarray:
    tail = 2.0 ** np.linspace(-8.0, TAIL_EXPONENT, count)
    nodes = [np.linspace(-64.0, 64.0, 4 * count), -tail, tail]
    for point in symbol.breakpoints:
        window = np.linspace(-1.0, 1.0, 129)
        nodes.append(point + window)
    return np.unique(np.concatenate(nodes))


def _piece_sup(piece: Piece) -> float:
    ends = [piece.value_at(piece.lower), piece.value_at(piece.upper)]
    if piece.is_constant:
        return abs(piece.constant_value)
    if piece.is_affine:
        if any(v is None for v in ends):
            return math.inf
        return max(abs(v) for v in ends)

    nodes = _piece_nodes(piece.lower, piece.upper)
    with np.errstate(all="ignore"):
        values = np.abs(piece(nodes))
    values = np.where(np.isfinite(values), values, 0.0)
    best_index = int(np.argmax(values))
    best = float(values[best_index])
    if 0 < best_index < len(nodes) - 1:
        lo, hi = nodes[best_index - 1], nodes[best_index + 1]
        refined = minimize_scalar(
            lambda t: -abs(complex(piece(np.array([t]))[0])),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * max(1.0, abs(nodes[best_index]))}
        )
        if refined.success:
            best = max(best, float(-refined.fun))
    try:
        best = max(best, piece_sup(piece, piece.lower, piece.upper).value)
    except NotEnclosable:
        pass
    for value in ends:
        if value is not None:
            best = max(best, abs(value))
    return best


def sup_norm(a: MultiplierSymbol) -> float:
    """ess sup |a|. Affine and constant pieces are exact; other pieces are
    sampled, the best sample is refined by a bounded scalar search, and the
    samples of an interval branch and bound are added so narrow bumps far
    out are not missed.
    """
    if isinstance(a, Symbol):
        return max(_piece_sup(piece) for piece in a.pieces)
    nodes = _symbol_nodes(a)
    best = float(np.max(np.abs(a.evaluate(nodes))))
    for limit in a.limits:
        if limit is not None:
            best = max(best, abs(limit))
    return best


def _integrate_abs(function: Callable[[float], float], lo: float, hi: float, points: Optional[Sequence[float]] = None) -> float:
    value, _ = quad(function, lo, hi, points=points, epsabs=VARIATION_EPSABS, epsrel=VARIATION_EPSREL, limit=500)
    return value


class _SlopeTracker:
    """Locates the peaks of |a'| on a piece with interval enclosures, so the
    tail integration does not step over a bump far out."""

    def __init__(self, piece: Piece):
        self.slope = Piece(piece.lower, piece.upper, piece.derivative_expr(1))
        modulus_enclosure(self.slope.expr)

    def peaks(self, lo: float, hi: float) -> Optional[List[float]]:
        found = piece_sup(self.slope, lo, hi, rtol=PEAK_RTOL)
        if found.argmax is not None and lo < found.argmax < hi:
            return [found.argmax]
        return None

    def beyond(self, start: float, direction: int) -> float:
        """Largest sampled |a'| from start towards +-inf."""
        lo, hi = (start, self.slope.upper) if direction > 0 else (self.slope.lower, start)
        if not lo < hi:
            return 0.0
        return piece_sup(self.slope, lo, hi, rtol=PEAK_RTOL).value


def _tail_variation(
        speed: Callable[[float], float],
        start: float,
        direction: int,
        name: str,
        tracker: Optional[_SlopeTracker] = None
    ) -> float:
    """Integral of the speed from ``start`` to +-inf over doubling annuli.
    The integral is accepted once an annulus adds at most 1e-9 of the total
    and, when a tracker is given, |a'| stays below that level further out.
    """
    total = 0.0
    inner = 0.0
    width = max(1.0, abs(start))
    for _ in range(MAX_ANNULI):
        outer = inner + width
        lo, hi = sorted((start + direction * inner, start + direction * outer))
        points = tracker.peaks(lo, hi) if tracker is not None else None
        segment = _integrate_abs(speed, lo, hi, points)
        total += segment
        level = VARIATION_STOP * max(total, 1.0)
        if segment <= level and (tracker is None or tracker.beyond(start + direction * outer, direction) <= level):
            return total
        inner = outer
        width *= 2.0
    raise UnboundedVariation(f"Variation of {name!r} does not converge towards {'+' if direction > 0 else '-'}inf")


def _piece_variation(piece: Piece, name: str) -> float:
    if piece.is_constant:
        return 0.0
    lo_value, hi_value = piece.value_at(piece.lower), piece.value_at(piece.upper)
    if piece.is_affine:
        if math.isinf(piece.lower) or math.isinf(piece.upper):
            raise UnboundedVariation(f"Symbol {name!r} has an unbounded affine piece")
        return abs(hi_value - lo_value)
    if lo_value is None or hi_value is None:
        raise UnboundedVariation(f"Symbol {name!r} has no limit at an end of ({piece.lower}, {piece.upper})")

    derivative = piece.derivative(1)

    def speed(t: float) -> float:
        value = abs(complex(derivative(np.array([t]))[0]))
        return value if math.isfinite(value) else 0.0

    tracker = None
    if math.isinf(piece.lower) or math.isinf(piece.upper):
        try:
            tracker = _SlopeTracker(piece)
        except NotEnclosable:
            get_logger(__name__).debug(f"No enclosure of the slope of {name!r}; tail variation is sampled only")
    if math.isinf(piece.lower) and math.isinf(piece.upper):
        return _tail_variation(speed, 0.0, -1, name, tracker) + _tail_variation(speed, 0.0, 1, name, tracker)
    if math.isinf(piece.lower):
        return _tail_variation(speed, piece.upper, -1, name, tracker)
    if math.isinf(piece.upper):
        return _tail_variation(speed, piece.lower, 1, name, tracker)
    return _integrate_abs(speed, piece.lower, piece.upper)


def total_variation(a: MultiplierSymbol) -> float:
    """V(a) = sum over pieces of int |a'| plus the jump magnitudes. For a
    mollified symbol the variation of base and offset is returned, which
    bounds the variation of the convolution from above.

    :raises UnboundedVariation: a tail integral does not converge or a
        piece has no limit at one of its ends
    """
    if isinstance(a, MollifiedSymbol):
        variation = total_variation(a.base)
        if a.offset is not None:
            variation += total_variation(a.offset)
        return variation
    if not isinstance(a, Symbol):
        raise TypeError(f"Cannot compute the variation of {type(a).__name__}")
    variation = sum(_piece_variation(piece, a.name) for piece in a.pieces)
    variation += sum(jump.magnitude for jump in a.jumps)
    return float(variation)


def vnorm(a: MultiplierSymbol) -> float:
    """||a||_V = ||a||_inf + V(a)."""
    return sup_norm(a) + total_variation(a)


def refinement_variation(a: MultiplierSymbol, points: Iterable[float]) -> float:
    """Partition sum of |a(x_k) - a(x_{k-1})| over the sorted points."""
    x = np.sort(np.asarray(list(points), dtype=float))
    values = a.evaluate(x)
    return float(np.sum(np.abs(np.diff(values))))


# -- Wiener algebra -----------------------------------------------------------

DensitySource = Union[None, str, sympy.Expr, Symbol, GridFunction]


def _l1_of_expression(expr: sympy.Expr) -> float:
    f = compile_expression(expr, dtype=complex)

    def magnitude(t: float) -> float:
        return abs(complex(f(np.array([t]))[0]))

    left, _ = quad(magnitude, -math.inf, 0.0, epsabs=1e-13, epsrel=1e-11, limit=500)
    right, _ = quad(magnitude, 0.0, math.inf, epsabs=1e-13, epsrel=1e-11, limit=500)
    return left + right


def _l1_of_symbol(density: Symbol) -> float:
    total = 0.0
    for piece in density.pieces:
        if piece.is_constant and piece.constant_value == 0:
            continue
        if math.isinf(piece.lower) and math.isinf(piece.upper):
            total += _l1_of_expression(piece.expr)
            continue
        if (math.isinf(piece.lower) or math.isinf(piece.upper)) and piece.is_constant:
            raise NotInWienerForm(f"Density {density.name!r} is not integrable")

        def magnitude(t: float, piece=piece) -> float:
            return abs(complex(piece(np.array([t]))[0]))

        value, _ = quad(magnitude, piece.lower, piece.upper, epsabs=1e-13, epsrel=1e-11, limit=500)
        total += value
    return total


def wiener_norm(c: complex, density: DensitySource = None) -> float:
    """||c + F f||_W = |c| + ||f||_1.

    :param c: constant part
    :param density: the L^1 function f as expression text, sympy expression,
        piecewise symbol or sampled grid function; None stands for f = 0
    :raises NotInWienerForm: the density is not integrable
    :return: Wiener norm
    """
    if density is None:
        l1 = 0.0
    elif isinstance(density, GridFunction):
        if not density.decays:
            raise NotInWienerForm("Sampled density does not decay inside its grid")
        l1 = density.grid.step * float(np.sum(density.magnitude))
    elif isinstance(density, Symbol):
        l1 = _l1_of_symbol(density)
    else:
        expr = parse_expression(density) if isinstance(density, str) else density
        l1 = _l1_of_expression(expr)
    if not math.isfinite(l1):
        raise NotInWienerForm("Density has infinite L^1 norm")
    return abs(complex(c)) + l1


def symbol_wiener_norm(a: MultiplierSymbol) -> float:
    form = a.wiener_form
    if form is None:
        raise NotInWienerForm(f"No Wiener representation known for {a.name!r}")
    return wiener_norm(form.constant, form.density)


def _fourier_of_piece(piece: Piece, x: float) -> complex:
    """int over the piece of f(t) e^{ixt} dt."""
    f = piece._evaluate

    def real(t):
        return float(np.real(f(np.array([t]))[0]))

    def imag(t):
        return float(np.imag(f(np.array([t]))[0]))

    def transform(g_real, g_imag, lo, hi, sign):
        # integral of (g_real + i g_imag)(t) e^{i sign x t} over (lo, hi) with lo finite
        if x == 0.0:
            return (quad(g_real, lo, hi, limit=500)[0] + 1j * quad(g_imag, lo, hi, limit=500)[0])
        omega = sign * x
        args = dict(wvar=abs(omega), limit=500)
        s = 1.0 if omega > 0 else -1.0
        rc = quad(g_real, lo, hi, weight="cos", **args)[0]
        rs = quad(g_real, lo, hi, weight="sin", **args)[0] * s
        ic = quad(g_imag, lo, hi, weight="cos", **args)[0]
        is_ = quad(g_imag, lo, hi, weight="sin", **args)[0] * s
        return (rc - is_) + 1j * (rs + ic)

    lo, hi = piece.lower, piece.upper
    if math.isinf(lo) and math.isinf(hi):
        return (transform(real, imag, 0.0, math.inf, 1.0)
                + transform(lambda s: real(-s), lambda s: imag(-s), 0.0, math.inf, -1.0))
    if math.isinf(lo):
        return transform(lambda s: real(-s), lambda s: imag(-s), -hi, math.inf, -1.0)
    return transform(real, imag, lo, hi, 1.0)


def wiener_defect(a: MultiplierSymbol, points: Sequence[float]) -> float:
    """Largest |a(x) - c - (F f)(x)| over the points, evaluating F f by
    oscillatory quadrature.

    :raises NotInWienerForm: a has no Wiener representation
    """
    form = a.wiener_form
    if form is None:
        raise NotInWienerForm(f"No Wiener representation known for {a.name!r}")
    worst = 0.0
    for x in points:
        represented = complex(form.constant)
        if form.density is not None:
            represented += sum(
                _fourier_of_piece(piece, float(x))
                for piece in form.density.pieces
                if not (piece.is_constant and piece.constant_value == 0)
            )
        worst = max(worst, abs(complex(a(float(x))) - represented))
    return worst


# -- SO^3 ---------------------------------------------------------------------

def _dilation_derivatives(expr: sympy.Expr, order: int = SO3_ORDER) -> Tuple[sympy.Expr, ...]:
    """D^0 a, ..., D^order a with (D f)(x) = x f'(x)."""
    derivatives = [expr]
    for _ in range(order):
        derivatives.append(sympy.simplify(X * sympy.diff(derivatives[-1], X)))
    return tuple(derivatives)


def so3_norm(a: Symbol) -> float:
    """sum_{j=0..3} ||D^j a||_inf / j!.

    :raises NotInSO3: a has jumps or some D^j a, j >= 1, does not vanish
        at +-inf
    """
    if a.jumps:
        raise NotInSO3(f"Symbol {a.name!r} has jumps")
    sups = np.zeros(SO3_ORDER + 1)
    for index, piece in enumerate(a.pieces):
        derivatives = _dilation_derivatives(piece.expr)
        for order, derivative in enumerate(derivatives):
            for direction, is_tail in ((-1, index == 0), (1, index == len(a.pieces) - 1)):
                if order == 0 or not is_tail:
                    continue
                limit = finite_limit(derivative, direction)
                if limit is None or abs(limit) > SO3_TOLERANCE:
                    raise NotInSO3(
                        f"D^{order} of {a.name!r} tends to {limit} at {'+' if direction > 0 else '-'}inf"
                    )
            if X not in derivative.free_symbols:
                sups[order] = max(sups[order], abs(complex(derivative)))
                continue
            f = compile_expression(derivative, dtype=complex)
            nodes = _piece_nodes(piece.lower, piece.upper)
            with np.errstate(all="ignore"):
                values = np.abs(f(nodes))
            sups[order] = max(sups[order], float(np.max(values[np.isfinite(values)], initial=0.0)))
            for end in (piece.lower, piece.upper):
                if math.isfinite(end):
                    with np.errstate(all="ignore"):
                        value = abs(complex(f(np.array([end]))[0]))
                    if math.isfinite(value):
                        sups[order] = max(sups[order], value)
    weights = np.array([1.0 / math.factorial(j) for j in range(SO3_ORDER + 1)])
    return float(np.dot(weights, sups))


def osc(f: Union[MultiplierSymbol, Callable], interval: Tuple[float, float], count: int = OSC_SAMPLES) -> float:
    """sup over x, y in the interval of |f(x) - f(y)|, on ``count`` samples."""
    nodes = np.linspace(interval[0], interval[1], count)
    values = np.asarray(f(nodes), dtype=complex)
    return float(np.max(np.abs(values[:, None] - values[None, :])))


def dyadic_oscillation(a: MultiplierSymbol, levels: Iterable[int] = range(0, 20)) -> Dict[int, float]:
    """Oscillation of a on the annuli +-[2^k, 2^(k+1)]."""
    result = {}
    for k in levels:
        lo, hi = 2.0 ** k, 2.0 ** (k + 1)
        nodes = np.linspace(lo, hi, OSC_SAMPLES // 2 + 1)
        values = a.evaluate(np.concatenate([-nodes[::-1], nodes]))
        result[int(k)] = float(np.max(np.abs(values[:, None] - values[None, :])))
    get_logger(__name__).debug(f"Dyadic oscillation of {a.name!r}: {result}")
    return result
