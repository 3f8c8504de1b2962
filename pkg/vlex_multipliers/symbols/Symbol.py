import csv
import math
import functools

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from vlex_multipliers.errors import SpecParseError
from vlex_multipliers.expressions import (
    X,
    parse_expression,
    compile_expression,
    finite_limit,
    expression_text
)
from vlex_multipliers.utils import encode_complex, decode_complex

JUMP_TOLERANCE = 1e-12
SPEC_TOLERANCE = 1e-9

SYMBOL_KEYS = {"kind", "name", "pieces", "expr", "jumps", "limits", "wiener"}
PIECE_KEYS = {"lower", "upper", "expr", "values"}
WIENER_KEYS = {"constant", "density"}

Scalar = Union[int, float, complex]


class SymbolClass(Enum):
    """Function classes a symbol can belong to, from the smallest up."""
    C0 = "C0"
    DOT_CONTINUOUS = "C-dot"
    BAR_CONTINUOUS = "C-bar"
    PIECEWISE_CONSTANT = "PC0-constant"
    PC0 = "PC0"


@functools.lru_cache(maxsize=4096)
def _limit(expr: sympy.Expr, direction: int) -> Optional[complex]:
    return finite_limit(expr, direction)


@functools.lru_cache(maxsize=4096)
def _derivative_expr(expr: sympy.Expr, order: int) -> sympy.Expr:
    return sympy.diff(expr, X, order) if order > 0 else expr


def _encode_bound(value: float):
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


def _decode_bound(raw) -> float:
    if isinstance(raw, str):
        if raw.strip() in ("inf", "+inf"):
            return math.inf
        if raw.strip() == "-inf":
            return -math.inf
        raise SpecParseError(f"Interval bound must be a number or '+-inf', got {raw!r}")
    try:
        return float(raw)
    except (TypeError, ValueError) as e:
        raise SpecParseError(f"Malformed interval bound {raw!r}") from e


def _as_expr(source) -> sympy.Expr:
    if isinstance(source, sympy.Expr):
        return source
    if isinstance(source, str):
        return parse_expression(source)
    value = complex(source)
    if value.imag == 0.0:
        return sympy.Float(value.real)
    return sympy.Float(value.real) + sympy.Float(value.imag) * sympy.I


@dataclass(frozen=True)
class Jump:
    location: float
    left: complex
    right: complex

    @property
    def magnitude(self) -> float:
        return abs(self.right - self.left)

    def to_list(self):
        return [self.location, encode_complex(self.left), encode_complex(self.right)]


@dataclass(frozen=True)
class Piece:
    """Closed-form expression on the open interval (lower, upper).

    Attributes:
        lower: left end, may be -inf
        upper: right end, may be inf
        expr: sympy expression in ``X``
        endpoint_values: exact one-sided values at (lower, upper) where known;
            evaluation of ``expr`` is used otherwise
    """
    lower: float
    upper: float
    expr: sympy.Expr
    endpoint_values: Optional[Tuple[Optional[complex], Optional[complex]]] = None
    _evaluate: Any = field(init=False, repr=False, compare=False)
    _derivatives: Dict[int, Callable] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.lower < self.upper:
            raise SpecParseError(f"Empty piece interval ({self.lower}, {self.upper})")
        object.__setattr__(self, "_evaluate", compile_expression(self.expr, dtype=complex))
        object.__setattr__(self, "_derivatives", {})

    def __call__(self, x) -> np.ndarray:
        return self._evaluate(x)

    @property
    def is_constant(self) -> bool:
        return X not in self.expr.free_symbols

    @property
    def is_affine(self) -> bool:
        if self.is_constant:
            return True
        return bool(self.expr.is_polynomial(X)) and sympy.Poly(self.expr, X).degree() <= 1

    @property
    def constant_value(self) -> complex:
        return complex(self.expr)

    def derivative_expr(self, order: int) -> sympy.Expr:
        return _derivative_expr(self.expr, order)

    def derivative(self, order: int) -> Callable[[np.ndarray], np.ndarray]:
        if order not in self._derivatives:
            self._derivatives[order] = compile_expression(_derivative_expr(self.expr, order))
        return self._derivatives[order]

    def value_at(self, point: float) -> Optional[complex]:
        """One-sided value at an end point of the piece, limit at +-inf."""
        if self.endpoint_values is not None:
            if point == self.lower and self.endpoint_values[0] is not None:
                return complex(self.endpoint_values[0])
            if point == self.upper and self.endpoint_values[1] is not None:
                return complex(self.endpoint_values[1])
        if self.is_constant:
            return self.constant_value
        if math.isinf(point):
            return _limit(self.expr, 1 if point > 0 else -1)
        value = complex(self._evaluate(np.array([point]))[0])
        if not np.isfinite(value):
            return _limit_at_point(self.expr, point, 1 if point == self.lower else -1)
        return value

    def spec(self) -> Dict[str, Any]:
        spec = {
            "lower": _encode_bound(self.lower),
            "upper": _encode_bound(self.upper),
            "expr": expression_text(self.expr),
        }
        if self.endpoint_values is not None:
            spec["values"] = [None if v is None else encode_complex(v) for v in self.endpoint_values]
        return spec


def _limit_at_point(expr: sympy.Expr, point: float, side: int) -> Optional[complex]:
    try:
        value = sympy.limit(expr, X, sympy.nsimplify(point), "+" if side > 0 else "-")
        return complex(value)
    except (TypeError, ValueError, NotImplementedError):
        return None


@dataclass(frozen=True)
class WienerForm:
    """Representation a = constant + F(density) with an integrable density.
    A missing density stands for the zero function.
    """
    constant: complex
    density: Optional["Symbol"] = None

    def scaled(self, factor: complex) -> "WienerForm":
        density = None if self.density is None else self.density * factor
        return WienerForm(factor * self.constant, density)

    def __add__(self, other: "WienerForm") -> "WienerForm":
        if self.density is None:
            density = other.density
        elif other.density is None:
            density = self.density
        else:
            density = self.density + other.density
        return WienerForm(self.constant + other.constant, density)

    def spec(self) -> Dict[str, Any]:
        spec = {"constant": encode_complex(self.constant)}
        if self.density is not None:
            spec["density"] = self.density.spec()
        return spec


class MultiplierSymbol(ABC):
    """Bounded function a on the real line used as a Fourier multiplier."""
    name: str

    @abstractmethod
    def __call__(self, x):
        """Evaluates the symbol; complex array for array input."""

    @property
    @abstractmethod
    def limits(self) -> Tuple[Optional[complex], Optional[complex]]:
        """Values at -inf and +inf, None where no limit exists."""

    @property
    @abstractmethod
    def breakpoints(self) -> np.ndarray:
        """Points where the symbol may fail to be smooth."""

    @abstractmethod
    def spec(self) -> Dict[str, Any]:
        """JSON-compatible description accepted by ``MultiplierSymbol.from_spec``."""

    @property
    def wiener_form(self) -> Optional[WienerForm]:
        return None

    def evaluate(self, x) -> np.ndarray:
        return np.asarray(self(np.asarray(x, dtype=float)), dtype=complex)

    @staticmethod
    def from_spec(spec: Dict[str, Any]) -> "MultiplierSymbol":
        """Builds a symbol from its JSON spec. Plain symbols are piecewise
        closed forms; ``{"kind": "mollified", ...}`` describes a mollified
        symbol.

        :raises SpecParseError: on malformed specs
        """
        if not isinstance(spec, dict):
            raise SpecParseError(f"Symbol spec must be an object, got {spec!r}")
        if spec.get("kind") == "mollified":
            from vlex_multipliers.symbols.MollifiedSymbol import MollifiedSymbol
            return MollifiedSymbol.from_spec(spec)
        return Symbol.from_spec(spec)


class Symbol(MultiplierSymbol):
    """Piecewise closed-form multiplier symbol.

    The pieces partition the real line; the value at a common end point is
    taken from the piece on the right. Jumps are the end points where the
    one-sided values differ.

    Attributes:
        pieces: contiguous pieces from -inf to inf
        name: identifier used in reports
        wiener: explicit Wiener representation, if known
    """

    def __init__(
            self,
            pieces: Sequence[Piece],
            name: Optional[str] = None,
            limits: Optional[Tuple[Optional[complex], Optional[complex]]] = None,
            wiener: Optional[WienerForm] = None
        ):
        pieces = tuple(pieces)
        if len(pieces) == 0:
            raise SpecParseError("A symbol needs at least one piece")
        if pieces[0].lower != -math.inf or pieces[-1].upper != math.inf:
            raise SpecParseError("Symbol pieces must cover (-inf, inf)")
        for left, right in zip(pieces[:-1], pieces[1:]):
            if left.upper != right.lower:
                raise SpecParseError(
                    f"Symbol pieces are not contiguous at {left.upper} / {right.lower}"
                )
        self.pieces = pieces
        self.name = name if name is not None else "symbol"
        self.wiener = wiener
        self._breakpoints = np.array([piece.upper for piece in pieces[:-1]], dtype=float)
        self._limits_override = limits
        self._cache: Dict[str, Any] = {}

    # -- construction ---------------------------------------------------------

    @classmethod
    def constant(cls, value: Scalar, name: Optional[str] = None) -> "Symbol":
        value = complex(value)
        return cls(
            [Piece(-math.inf, math.inf, _as_expr(value))],
            name=name if name is not None else f"const({encode_complex(value)})"
        )

    @classmethod
    def from_expression(cls, expr, name: Optional[str] = None, wiener: Optional[WienerForm] = None) -> "Symbol":
        expr = _as_expr(expr)
        return cls(
            [Piece(-math.inf, math.inf, expr)],
            name=name if name is not None else expression_text(expr),
            wiener=wiener
        )

    @classmethod
    def piecewise(
            cls,
            bounds: Sequence[float],
            exprs: Sequence,
            values: Optional[Sequence[Optional[Tuple[Optional[Scalar], Optional[Scalar]]]]] = None,
            name: Optional[str] = None
        ) -> "Symbol":
        """Symbol with pieces (bounds[i], bounds[i+1]) carrying exprs[i];
        bounds must start with -inf and end with inf.
        """
        if len(bounds) != len(exprs) + 1:
            raise ValueError("Need one more bound than expressions")
        if values is None:
            values = [None] * len(exprs)
        pieces = [
            Piece(float(bounds[i]), float(bounds[i + 1]), _as_expr(exprs[i]), values[i])
            for i in range(len(exprs))
        ]
        return cls(pieces, name=name)

    # -- evaluation -----------------------------------------------------------

    @property
    def breakpoints(self) -> np.ndarray:
        return self._breakpoints

    def piece_index(self, x) -> np.ndarray:
        return np.searchsorted(self._breakpoints, x, side="right")

    def piece_at(self, x: float) -> Piece:
        return self.pieces[int(self.piece_index(np.array([x]))[0])]

    def _evaluate_pieces(self, x, evaluators: Sequence[Callable]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        index = self.piece_index(flat)
        out = np.empty(flat.shape, dtype=complex)
        for i, evaluate in enumerate(evaluators):
            mask = index == i
            if np.any(mask):
                out[mask] = evaluate(flat[mask])
        return out.reshape(x.shape)

    def __call__(self, x):
        values = self._evaluate_pieces(x, self.pieces)
        if values.ndim == 0:
            return complex(values)
        return values

    def derivative(self, order: int) -> Callable[[np.ndarray], np.ndarray]:
        """Piecewise derivative of the given order, ignoring jumps."""
        evaluators = [piece.derivative(order) for piece in self.pieces]
        return lambda x: self._evaluate_pieces(x, evaluators)

    # -- structure ------------------------------------------------------------

    @property
    def jumps(self) -> List[Jump]:
        if "jumps" not in self._cache:
            jumps = []
            for left_piece, right_piece in zip(self.pieces[:-1], self.pieces[1:]):
                location = left_piece.upper
                left = left_piece.value_at(location)
                right = right_piece.value_at(location)
                if left is None or right is None:
                    raise SpecParseError(f"Symbol {self.name!r} has no one-sided value at {location}")
                scale = max(1.0, abs(left), abs(right))
                if abs(right - left) > JUMP_TOLERANCE * scale:
                    jumps.append(Jump(location, left, right))
            self._cache["jumps"] = jumps
        return self._cache["jumps"]

    @property
    def limits(self) -> Tuple[Optional[complex], Optional[complex]]:
        if "limits" not in self._cache:
            computed = (
                self.pieces[0].value_at(-math.inf),
                self.pieces[-1].value_at(math.inf)
            )
            if self._limits_override is not None:
                computed = tuple(
                    override if value is None else value
                    for value, override in zip(computed, self._limits_override)
                )
            self._cache["limits"] = computed
        return self._cache["limits"]

    @property
    def is_real(self) -> bool:
        if "real" not in self._cache:
            self._cache["real"] = all(
                piece.expr.is_real is True or sympy.im(piece.expr) == 0
                for piece in self.pieces
            )
        return self._cache["real"]

    @property
    def is_constant(self) -> bool:
        return len(self.pieces) == 1 and self.pieces[0].is_constant

    @property
    def classes(self) -> FrozenSet[SymbolClass]:
        left, right = self.limits
        classes = set()
        if left is None or right is None:
            return frozenset(classes)
        classes.add(SymbolClass.PC0)
        if all(piece.is_constant for piece in self.pieces):
            classes.add(SymbolClass.PIECEWISE_CONSTANT)
        if not self.jumps:
            classes.add(SymbolClass.BAR_CONTINUOUS)
            scale = max(1.0, abs(left), abs(right))
            if abs(left - right) <= SPEC_TOLERANCE * scale:
                classes.add(SymbolClass.DOT_CONTINUOUS)
                if abs(left) <= SPEC_TOLERANCE and abs(right) <= SPEC_TOLERANCE:
                    classes.add(SymbolClass.C0)
        return frozenset(classes)

    def belongs_to(self, symbol_class: SymbolClass) -> bool:
        return symbol_class in self.classes

    @property
    def wiener_form(self) -> Optional[WienerForm]:
        if self.wiener is not None:
            return self.wiener
        if self.is_constant:
            return WienerForm(self.pieces[0].constant_value)
        return None

    # -- algebra --------------------------------------------------------------

    def _segment_probe(self, lower: float, upper: float) -> float:
        if math.isinf(lower) and math.isinf(upper):
            return 0.0
        if math.isinf(lower):
            return upper - 1.0
        if math.isinf(upper):
            return lower + 1.0
        return 0.5 * (lower + upper)

    def _combine(self, other: "Symbol", operation: Callable, name: str) -> "Symbol":
        bounds = sorted(set(self._breakpoints.tolist()) | set(other.breakpoints.tolist()))
        bounds = [-math.inf] + bounds + [math.inf]
        pieces = []
        for lower, upper in zip(bounds[:-1], bounds[1:]):
            probe = self._segment_probe(lower, upper)
            mine, theirs = self.piece_at(probe), other.piece_at(probe)
            values = []
            for point in (lower, upper):
                a, b = mine.value_at(point), theirs.value_at(point)
                values.append(None if a is None or b is None else operation(a, b))
            pieces.append(Piece(lower, upper, operation(mine.expr, theirs.expr), tuple(values)))

        limits = None
        if self._limits_override is not None or other._limits_override is not None:
            limits = tuple(
                None if a is None or b is None else operation(a, b)
                for a, b in zip(self.limits, other.limits)
            )
        return Symbol(pieces, name=name, limits=limits)

    def _with_scalar(self, value: complex, operation: Callable, name: str) -> "Symbol":
        constant = _as_expr(value)
        pieces = []
        for piece in self.pieces:
            values = None
            if piece.endpoint_values is not None:
                values = tuple(
                    None if v is None else operation(v, value) for v in piece.endpoint_values
                )
            pieces.append(Piece(piece.lower, piece.upper, operation(piece.expr, constant), values))
        limits = None
        if self._limits_override is not None:
            limits = tuple(None if v is None else operation(v, value) for v in self.limits)
        return Symbol(pieces, name=name, limits=limits)

    @staticmethod
    def _scalar(other) -> Optional[complex]:
        if isinstance(other, (int, float, complex, np.number)):
            return complex(other)
        if isinstance(other, Symbol) and other.is_constant:
            return other.pieces[0].constant_value
        return None

    def __add__(self, other) -> "Symbol":
        scalar = self._scalar(other)
        other_form = None
        if scalar is not None:
            result = self._with_scalar(scalar, lambda a, b: a + b, f"({self.name}+{encode_complex(scalar)})")
            other_form = WienerForm(scalar)
        else:
            result = self._combine(other, lambda a, b: a + b, f"({self.name}+{other.name})")
            other_form = other.wiener_form
        if self.wiener_form is not None and other_form is not None:
            result.wiener = self.wiener_form + other_form
        return result

    __radd__ = __add__

    def __neg__(self) -> "Symbol":
        return self * -1.0

    def __sub__(self, other) -> "Symbol":
        scalar = self._scalar(other)
        if scalar is not None:
            return self + (-scalar)
        return self + (-other)

    def __rsub__(self, other) -> "Symbol":
        return (-self) + other

    def __mul__(self, other) -> "Symbol":
        scalar = self._scalar(other)
        if scalar is not None:
            result = self._with_scalar(scalar, lambda a, b: a * b, f"{encode_complex(scalar)}*{self.name}")
            if self.wiener_form is not None:
                result.wiener = self.wiener_form.scaled(scalar)
            return result
        own = Symbol._scalar(self)
        if own is not None and isinstance(other, Symbol):
            return other * own
        return self._combine(other, lambda a, b: a * b, f"({self.name}*{other.name})")

    __rmul__ = __mul__

    def renamed(self, name: str) -> "Symbol":
        return Symbol(self.pieces, name=name, limits=self._limits_override, wiener=self.wiener)

    def merged(self) -> "Symbol":
        """Joins neighbouring pieces with equal expressions and no jump."""
        pieces = [self.pieces[0]]
        for piece in self.pieces[1:]:
            last = pieces[-1]
            if sympy.simplify(last.expr - piece.expr) == 0:
                values = None
                if last.endpoint_values is not None or piece.endpoint_values is not None:
                    values = (
                        None if last.endpoint_values is None else last.endpoint_values[0],
                        None if piece.endpoint_values is None else piece.endpoint_values[1],
                    )
                pieces[-1] = Piece(last.lower, piece.upper, last.expr, values)
            else:
                pieces.append(piece)
        return Symbol(pieces, name=self.name, limits=self._limits_override, wiener=self.wiener)

    # -- serialization --------------------------------------------------------

    def spec(self) -> Dict[str, Any]:
        spec = {
            "name": self.name,
            "pieces": [piece.spec() for piece in self.pieces],
        }
        if self._limits_override is not None:
            spec["limits"] = [None if v is None else encode_complex(v) for v in self.limits]
        if self.wiener is not None:
            spec["wiener"] = self.wiener.spec()
        return spec

    @classmethod
    def from_spec(cls, spec: Dict[str, Any]) -> "Symbol":
        """Builds a symbol from a spec such as
        ``{"expr": "2/(1+x^2)", "wiener": {"constant": 0, "density": "exp(-abs(x))"}}`` or
        ``{"pieces": [{"lower": "-inf", "upper": 0, "expr": "-1"},
        {"lower": 0, "upper": "inf", "expr": "1"}], "jumps": [[0, -1, 1]]}``.

        Supplied jumps and limits are checked against the pieces.

        :raises SpecParseError: on unknown keys, malformed values or
            inconsistent jumps and limits
        """
        unknown = set(spec) - SYMBOL_KEYS
        if unknown:
            raise SpecParseError(f"Unknown keys in symbol spec: {sorted(unknown)}")
        if spec.get("kind", "piecewise") != "piecewise":
            raise SpecParseError(f"Unknown symbol kind {spec['kind']!r}")
        if ("pieces" in spec) == ("expr" in spec):
            raise SpecParseError("Symbol spec needs exactly one of 'pieces' and 'expr'")

        try:
            if "expr" in spec:
                pieces = [Piece(-math.inf, math.inf, parse_expression(spec["expr"]))]
            else:
                pieces = []
                for raw in spec["pieces"]:
                    unknown = set(raw) - PIECE_KEYS
                    if unknown:
                        raise SpecParseError(f"Unknown keys in piece spec: {sorted(unknown)}")
                    values = raw.get("values")
                    if values is not None:
                        values = tuple(None if v is None else decode_complex(v) for v in values)
                    pieces.append(Piece(
                        _decode_bound(raw["lower"]),
                        _decode_bound(raw["upper"]),
                        parse_expression(str(raw["expr"])),
                        values
                    ))
            limits = None
            if "limits" in spec:
                limits = tuple(None if v is None else decode_complex(v) for v in spec["limits"])
                if len(limits) != 2:
                    raise SpecParseError("'limits' needs two entries")
            wiener = _wiener_from_spec(spec["wiener"]) if "wiener" in spec else None
        except (KeyError, TypeError, ValueError) as e:
            raise SpecParseError(f"Malformed symbol spec: {e}") from e

        symbol = cls(pieces, name=spec.get("name"), wiener=wiener)
        if limits is not None:
            computed = symbol.limits
            for value, given in zip(computed, limits):
                if value is not None and given is not None and abs(value - given) > SPEC_TOLERANCE:
                    raise SpecParseError(f"Given limit {given} contradicts computed limit {value}")
            symbol = cls(pieces, name=spec.get("name"), limits=limits, wiener=wiener)
        if "jumps" in spec:
            _check_jumps(symbol, spec["jumps"])
        return symbol

    def __repr__(self) -> str:
        return f"Symbol({self.name!r}, pieces={len(self.pieces)}, jumps={len(self.jumps)})"


def _wiener_from_spec(raw: Dict[str, Any]) -> WienerForm:
    unknown = set(raw) - WIENER_KEYS
    if unknown:
        raise SpecParseError(f"Unknown keys in wiener spec: {sorted(unknown)}")
    density = raw.get("density")
    if isinstance(density, str):
        density = Symbol.from_expression(density, name="density")
    elif isinstance(density, dict):
        density = Symbol.from_spec(density)
    elif density is not None:
        raise SpecParseError(f"Wiener density must be an expression or symbol spec, got {density!r}")
    return WienerForm(decode_complex(raw.get("constant", 0.0)), density)


def _check_jumps(symbol: Symbol, raw_jumps):
    given = []
    for raw in raw_jumps:
        if len(raw) != 3:
            raise SpecParseError(f"Jumps are triples (location, left, right), got {raw!r}")
        given.append(Jump(float(raw[0]), decode_complex(raw[1]), decode_complex(raw[2])))
    computed = symbol.jumps
    if len(given) != len(computed):
        raise SpecParseError(f"Spec lists {len(given)} jumps, pieces have {len(computed)}")
    for a, b in zip(sorted(given, key=lambda j: j.location), computed):
        if (abs(a.location - b.location) > SPEC_TOLERANCE
                or abs(a.left - b.left) > SPEC_TOLERANCE
                or abs(a.right - b.right) > SPEC_TOLERANCE):
            raise SpecParseError(f"Jump {a} does not match the pieces ({b})")


def write_symbol_csv(path: str, symbol: MultiplierSymbol, nodes):
    """Samples of a symbol with columns x, re, im."""
    nodes = np.asarray(nodes, dtype=float)
    values = symbol.evaluate(nodes)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "re", "im"])
        for x, value in zip(nodes, values):
            writer.writerow([repr(float(x)), repr(float(value.real)), repr(float(value.imag))])
