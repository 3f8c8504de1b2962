import dataclasses
import math

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple, TYPE_CHECKING

import numpy as np

from scipy.optimize import minimize_scalar

from vlex_multipliers.errors import InvalidExponent, NotEnclosable, SpecParseError
from vlex_multipliers.expressions import (
    parse_expression,
    compile_expression,
    finite_limit
)

if TYPE_CHECKING:
    from vlex_multipliers.exponent.LogHoelder import LHCertificate


KIND = "kind"
DEFAULT_DOMAIN_HALFWIDTH = 20.0
PROBE_COUNT = 4097
FAR_PROBE_DOUBLINGS = 60
EXTREMUM_RTOL = 1e-10


class ExponentKind(Enum):
    CONSTANT = "constant"
    PIECEWISE_LINEAR = "pwl"
    CLOSED_FORM = "closed_form"
    DERIVED = "derived"


class DerivedMap(Enum):
    """Monotone maps s -> g(s) turning a parent exponent into a new one."""
    CONJUGATE = "conjugate"
    THETA = "theta"
    DIENING = "diening"


SPEC_KEYS = {
    ExponentKind.CONSTANT: {KIND, "value"},
    ExponentKind.PIECEWISE_LINEAR: {KIND, "knots", "left_tail", "right_tail"},
    ExponentKind.CLOSED_FORM: {KIND, "expr", "domain_halfwidth"},
    ExponentKind.DERIVED: {KIND, "map", "parent", "theta", "p0"},
}


def _check_range(p_minus: float, p_plus: float, description: str):
    if not (np.isfinite(p_minus) and np.isfinite(p_plus)):
        raise InvalidExponent(f"{description}: bounds must be finite, got ({p_minus}, {p_plus})")
    if p_minus <= 1.0:
        raise InvalidExponent(f"{description}: p_minus = {p_minus} must exceed 1")


class VariableExponent(ABC):
    """An exponent function p: R -> (1, inf) with essential bounds
    1 < p_minus <= p(x) <= p_plus < inf.

    Attributes:
        certificate: optional log-Hoelder certificate attached with
            ``with_certificate``
    """
    kind: ExponentKind
    certificate: Optional["LHCertificate"]

    @abstractmethod
    def __call__(self, x) -> np.ndarray:
        """Evaluates p at the given points; returns a float array."""

    @property
    @abstractmethod
    def bounds(self) -> Tuple[float, float]:
        """Essential bounds (p_minus, p_plus)."""

    @property
    @abstractmethod
    def tails(self) -> Tuple[Optional[float], Optional[float]]:
        """Values of p at -inf and +inf, None where no limit exists."""

    @abstractmethod
    def spec(self) -> Dict[str, Any]:
        """JSON-compatible description accepted by ``from_spec``."""

    @property
    def p_minus(self) -> float:
        return self.bounds[0]

    @property
    def p_plus(self) -> float:
        return self.bounds[1]

    @property
    def is_constant(self) -> bool:
        return self.bounds[0] == self.bounds[1]

    def with_certificate(self, certificate: "LHCertificate") -> "VariableExponent":
        return dataclasses.replace(self, certificate=certificate)

    @staticmethod
    def from_spec(spec: Dict[str, Any]) -> "VariableExponent":
        """Builds an exponent from its JSON spec, e.g.
        ``{"kind": "constant", "value": 2.5}``,
        ``{"kind": "pwl", "knots": [[-1, 2], [0, 3], [1, 2]], "left_tail": 2, "right_tail": 2}``
        or ``{"kind": "closed_form", "expr": "2+1/(1+x^2)", "domain_halfwidth": 20}``.

        :param spec: parsed JSON object
        :raises SpecParseError: on unknown kinds, unknown keys or malformed values
        :raises InvalidExponent: if the exponent leaves (1, inf)
        :return: exponent instance
        """
        if not isinstance(spec, dict) or KIND not in spec:
            raise SpecParseError(f"Exponent spec needs a '{KIND}' field: {spec!r}")
        try:
            kind = ExponentKind(spec[KIND])
        except ValueError as e:
            raise SpecParseError(f"Unknown exponent kind {spec[KIND]!r}") from e
        unknown = set(spec) - SPEC_KEYS[kind]
        if unknown:
            raise SpecParseError(
                f"Unknown keys for exponent kind '{kind.value}': {sorted(unknown)}"
            )

        try:
            if kind is ExponentKind.CONSTANT:
                return ConstantExponent(float(spec["value"]))
            if kind is ExponentKind.PIECEWISE_LINEAR:
                knots = tuple((float(x), float(p)) for x, p in spec["knots"])
                return PiecewiseLinearExponent(
                    knots,
                    float(spec["left_tail"]),
                    float(spec["right_tail"])
                )
            if kind is ExponentKind.CLOSED_FORM:
                values = {"domain_halfwidth": DEFAULT_DOMAIN_HALFWIDTH, **spec}
                return ClosedFormExponent(
                    values["expr"],
                    float(values["domain_halfwidth"])
                )
            values = {"theta": 0.0, "p0": 2.0, **spec}
            return DerivedExponent(
                VariableExponent.from_spec(values["parent"]),
                DerivedMap(values["map"]),
                float(values["theta"]),
                float(values["p0"])
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SpecParseError(f"Malformed exponent spec {spec!r}: {e}") from e


@dataclass(frozen=True)
class ConstantExponent(VariableExponent):
    value: float
    certificate: Optional["LHCertificate"] = None
    kind = ExponentKind.CONSTANT

    def __post_init__(self):
        _check_range(self.value, self.value, "constant exponent")

    def __call__(self, x) -> np.ndarray:
        return np.full(np.shape(x), self.value, dtype=float)

    @property
    def bounds(self) -> Tuple[float, float]:
        return self.value, self.value

    @property
    def tails(self) -> Tuple[Optional[float], Optional[float]]:
        return self.value, self.value

    def spec(self) -> Dict[str, Any]:
        return {KIND: self.kind.value, "value": self.value}


@dataclass(frozen=True)
class PiecewiseLinearExponent(VariableExponent):
    """Linear interpolation between knots, constant tails outside the
    outermost knots. A tail different from its outermost knot value makes p
    jump at that knot.
    """
    knots: Tuple[Tuple[float, float], ...]
    left_tail: float
    right_tail: float
    certificate: Optional["LHCertificate"] = None
    kind = ExponentKind.PIECEWISE_LINEAR

    def __post_init__(self):
        if len(self.knots) == 0:
            raise SpecParseError("Piecewise-linear exponent needs at least one knot")
        xs = np.array([k[0] for k in self.knots], dtype=float)
        if np.any(np.diff(xs) <= 0):
            raise SpecParseError(f"Knots must be strictly increasing, got {xs.tolist()}")
        lo, hi = self.bounds
        _check_range(lo, hi, "piecewise-linear exponent")

    @property
    def knot_positions(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots], dtype=float)

    @property
    def knot_values(self) -> np.ndarray:
        return np.array([k[1] for k in self.knots], dtype=float)

    @property
    def max_slope(self) -> float:
        if len(self.knots) < 2:
            return 0.0
        return float(np.max(
            np.abs(np.diff(self.knot_values)) / np.diff(self.knot_positions)
        ))

    @property
    def is_continuous(self) -> bool:
        return (self.left_tail == self.knots[0][1]
                and self.right_tail == self.knots[-1][1])

    def __call__(self, x) -> np.ndarray:
        return np.interp(
            np.asarray(x, dtype=float),
            self.knot_positions,
            self.knot_values,
            left=self.left_tail,
            right=self.right_tail
        )

    @property
    def bounds(self) -> Tuple[float, float]:
        values = [self.left_tail, self.right_tail] + [k[1] for k in self.knots]
        return float(min(values)), float(max(values))

    @property
    def tails(self) -> Tuple[Optional[float], Optional[float]]:
        return self.left_tail, self.right_tail

    def spec(self) -> Dict[str, Any]:
        return {
            KIND: self.kind.value,
            "knots": [[x, p] for x, p in self.knots],
            "left_tail": self.left_tail,
            "right_tail": self.right_tail,
        }


def probe_nodes(half_width: float) -> np.ndarray:
    """Dense nodes on [-L, L] plus geometrically spaced far nodes."""
    core = np.linspace(-half_width, half_width, PROBE_COUNT)
    far = half_width * np.power(2.0, np.arange(1, FAR_PROBE_DOUBLINGS + 1))
    return np.concatenate([-far[::-1], core, far])


def _enclosed_extrema(expression, lo: float, hi: float) -> Tuple[float, float]:
    """Widens (lo, hi) by a branch-and-bound search over the whole line, which
    finds peaks lying between the far grid nodes."""
    # symbols imports grid, which imports this module
    from vlex_multipliers.symbols.Symbol import Piece
    from vlex_multipliers.symbols.enclosure import piece_sup

    try:
        top = piece_sup(Piece(-math.inf, math.inf, expression), -math.inf, math.inf, rtol=EXTREMUM_RTOL)
        if not math.isfinite(top.bound):
            return lo, hi
        ceiling = math.ceil(top.bound) + 1.0
        bottom = piece_sup(
            Piece(-math.inf, math.inf, ceiling - expression), -math.inf, math.inf, rtol=EXTREMUM_RTOL
        )
    except NotEnclosable:
        return lo, hi
    return min(lo, ceiling - bottom.value), max(hi, top.value)


@dataclass(frozen=True)
class ClosedFormExponent(VariableExponent):
    """Exponent given by an expression in x. Bounds come from a dense-grid
    extremum search refined by bounded scalar minimization, a branch-and-bound
    search with interval enclosures over the whole line, and the limits at
    +-inf. Expressions without an interval rule fall back to the grid alone, so
    a narrow peak lying between two far grid nodes goes unseen for them.
    """
    expr: str
    domain_halfwidth: float = DEFAULT_DOMAIN_HALFWIDTH
    certificate: Optional["LHCertificate"] = None
    kind = ExponentKind.CLOSED_FORM
    _evaluate: Any = field(init=False, repr=False, compare=False)
    _bounds: Tuple[float, float] = field(init=False, repr=False, compare=False)
    _tails: Tuple[Optional[float], Optional[float]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if self.domain_halfwidth <= 0:
            raise SpecParseError("domain_halfwidth must be positive")
        expression = parse_expression(self.expr)
        complex_evaluate = compile_expression(expression, dtype=complex)

        nodes = probe_nodes(self.domain_halfwidth)
        samples = complex_evaluate(nodes)
        if not np.all(np.isfinite(samples)):
            raise InvalidExponent(f"Exponent {self.expr!r} is not finite on the probe grid")
        if np.max(np.abs(samples.imag)) > 1e-12:
            raise InvalidExponent(f"Exponent {self.expr!r} is not real valued")
        evaluate = compile_expression(expression, dtype=float)
        values = samples.real

        tails = []
        for direction in (-1, 1):
            limit = finite_limit(expression, direction)
            tails.append(None if limit is None else float(limit.real))

        lo = float(np.min(values))
        hi = float(np.max(values))
        core = slice(FAR_PROBE_DOUBLINGS, FAR_PROBE_DOUBLINGS + PROBE_COUNT)
        core_nodes, core_values = nodes[core], values[core]
        for sign, index in ((1.0, int(np.argmin(core_values))), (-1.0, int(np.argmax(core_values)))):
            left = core_nodes[max(index - 1, 0)]
            right = core_nodes[min(index + 1, len(core_nodes) - 1)]
            if right > left:
                result = minimize_scalar(
                    lambda t: sign * float(evaluate(np.array([t]))[0]),
                    bounds=(left, right),
                    method="bounded",
                    options={"xatol": 1e-12}
                )
                refined = sign * float(result.fun)
                lo, hi = (min(lo, refined), hi) if sign > 0 else (lo, max(hi, refined))
        lo, hi = _enclosed_extrema(expression, lo, hi)
        for tail in tails:
            if tail is not None:
                lo, hi = min(lo, tail), max(hi, tail)

        _check_range(lo, hi, f"exponent {self.expr!r}")
        object.__setattr__(self, "_evaluate", evaluate)
        object.__setattr__(self, "_bounds", (lo, hi))
        object.__setattr__(self, "_tails", (tails[0], tails[1]))

    def __call__(self, x) -> np.ndarray:
        return self._evaluate(x)

    @property
    def bounds(self) -> Tuple[float, float]:
        return self._bounds

    @property
    def tails(self) -> Tuple[Optional[float], Optional[float]]:
        return self._tails

    def spec(self) -> Dict[str, Any]:
        return {
            KIND: self.kind.value,
            "expr": self.expr,
            "domain_halfwidth": self.domain_halfwidth,
        }


def apply_map(mapping: DerivedMap, s, theta: float = 0.0, p0: float = 2.0):
    """Evaluates the monotone exponent map g(s) of ``mapping``."""
    s = np.asarray(s, dtype=float)
    if mapping is DerivedMap.CONJUGATE:
        return s / (s - 1.0)
    if mapping is DerivedMap.THETA:
        return 2.0 * (1.0 - theta) * s / (2.0 - theta * s)
    return (1.0 - theta) / (1.0 / s - theta / p0)


@dataclass(frozen=True)
class DerivedExponent(VariableExponent):
    """Exponent g(p(x)) for one of the monotone maps: conjugate
    s/(s-1), the interpolation transform 2(1-theta)s/(2-theta s), or the
    two-exponent transform (1-theta)/(1/s - theta/p0).
    """
    parent: VariableExponent
    mapping: DerivedMap
    theta: float = 0.0
    p0: float = 2.0
    certificate: Optional["LHCertificate"] = None
    kind = ExponentKind.DERIVED

    def __post_init__(self):
        lo, hi = self.parent.bounds
        if self.mapping is DerivedMap.THETA and not 2.0 - self.theta * hi > 0:
            raise InvalidExponent(f"2 - theta*p_plus must be positive (theta={self.theta})")
        if self.mapping is DerivedMap.DIENING and not 1.0 / hi - self.theta / self.p0 > 0:
            raise InvalidExponent(
                f"1/p_plus - theta/p0 must be positive (theta={self.theta}, p0={self.p0})"
            )
        mapped_lo, mapped_hi = self.bounds
        _check_range(mapped_lo, mapped_hi, f"{self.mapping.value} exponent")

    def _map(self, s):
        return apply_map(self.mapping, s, self.theta, self.p0)

    def __call__(self, x) -> np.ndarray:
        return self._map(self.parent(x))

    @property
    def bounds(self) -> Tuple[float, float]:
        mapped = self._map(np.array(self.parent.bounds))
        return float(np.min(mapped)), float(np.max(mapped))

    @property
    def tails(self) -> Tuple[Optional[float], Optional[float]]:
        return tuple(
            None if t is None else float(self._map(t)) for t in self.parent.tails
        )

    def spec(self) -> Dict[str, Any]:
        return {
            KIND: self.kind.value,
            "map": self.mapping.value,
            "parent": self.parent.spec(),
            "theta": self.theta,
            "p0": self.p0,
        }


def bounds(p: VariableExponent) -> Tuple[float, float]:
    """Cached essential bounds (p_minus, p_plus) of an exponent."""
    return p.bounds


def constant(value: float) -> ConstantExponent:
    return ConstantExponent(float(value))
