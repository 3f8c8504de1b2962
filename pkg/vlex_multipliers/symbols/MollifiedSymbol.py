"""Convolution of a piecewise symbol with the standard bump
phi(y) = C exp(-1/(1-y^2)) on (-1, 1), rescaled to phi_delta.
"""
import math
import functools

from typing import Any, Dict, Optional, Tuple

import numpy as np

from scipy.integrate import quad, quad_vec

from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import SpecParseError
from vlex_multipliers.symbols.Symbol import MultiplierSymbol, Symbol
from vlex_multipliers.symbols.enclosure import derivative_bounds
from vlex_multipliers.utils import get_logger

SERIES_ORDERS = (2, 4, 6)
REMAINDER_ORDER = 8
QUAD_EPSREL = 1e-10
QUAD_EPSABS = 1e-15
MOLLIFIED_KEYS = {"kind", "name", "base", "delta", "offset"}


def _unnormalized_bump(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape, dtype=float)
    inside = np.abs(y) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


@functools.lru_cache(maxsize=1)
def mollifier_constant() -> float:
    """C = 1 / integral of exp(-1/(1-y^2)) over (-1, 1), about 2.25228."""
    mass, _ = quad(lambda y: float(_unnormalized_bump(y)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return 1.0 / mass


def bump(y) -> np.ndarray:
    return mollifier_constant() * _unnormalized_bump(y)


@functools.lru_cache(maxsize=16)
def mollifier_moment(order: int) -> float:
    """Integral of |y|^order phi(y) over (-1, 1)."""
    value, _ = quad(
        lambda y: abs(y) ** order * float(bump(y)), -1.0, 1.0, epsabs=1e-15, epsrel=1e-13
    )
    return value


class MollifiedSymbol(MultiplierSymbol):
    """offset + base * phi_delta.

    The convolution is evaluated as base(x) + defect(x) with
    defect(x) = int (base(x - delta y) - base(x)) phi(y) dy. Below the series
    switch width, nodes farther than delta from every breakpoint use the
    even moment series of the defect.

    Attributes:
        base: piecewise symbol that is mollified
        delta: mollification width
        offset: symbol added unchanged, e.g. a constant or a jump killer
    """

    def __init__(
            self,
            base: Symbol,
            delta: float,
            offset: Optional[Symbol] = None,
            name: Optional[str] = None,
            series_switch: Optional[float] = None
        ):
        if not delta > 0:
            raise ValueError(f"Mollification width must be positive, got {delta}")
        self.base = base
        self.delta = float(delta)
        self.offset = offset
        self.name = name if name is not None else f"{base.name}*phi[{delta:g}]"
        if series_switch is None:
            series_switch = get_defaults().series_switch
        self.series_switch = series_switch

    # -- geometry -------------------------------------------------------------

    @property
    def breakpoints(self) -> np.ndarray:
        points = self.base.breakpoints
        if self.offset is not None:
            points = np.union1d(points, self.offset.breakpoints)
        return points

    @property
    def limits(self) -> Tuple[Optional[complex], Optional[complex]]:
        limits = self.base.limits
        if self.offset is None:
            return limits
        return tuple(
            None if a is None or b is None else a + b
            for a, b in zip(limits, self.offset.limits)
        )

    def _near(self, x: np.ndarray) -> np.ndarray:
        points = self.base.breakpoints
        if len(points) == 0:
            return np.zeros(x.shape, dtype=bool)
        index = np.clip(np.searchsorted(points, x), 1, len(points))
        left = np.abs(x - points[index - 1])
        right = np.abs(x - points[np.minimum(index, len(points) - 1)])
        return np.minimum(left, right) < self.delta

    # -- defect of the convolution --------------------------------------------

    def _defect_series(self, x: np.ndarray) -> np.ndarray:
        total = np.zeros(x.shape, dtype=complex)
        for order in SERIES_ORDERS:
            coefficient = self.delta ** order * mollifier_moment(order) / math.factorial(order)
            total += coefficient * self.base.derivative(order)(x)
        return total

    def _defect_vector(self, x: np.ndarray) -> np.ndarray:
        base_values = self.base.evaluate(x)

        def integrand(y):
            difference = self.base.evaluate(x - self.delta * y) - base_values
            weighted = float(bump(y)) * difference
            return np.concatenate([weighted.real, weighted.imag])

        scale = max(1.0, float(np.max(np.abs(base_values))) if len(x) else 1.0)
        result, _ = quad_vec(integrand, -1.0, 1.0, epsabs=QUAD_EPSABS * scale, epsrel=QUAD_EPSREL)
        return result[:len(x)] + 1j * result[len(x):]

    def _defect_split(self, x: float) -> complex:
        base_value = complex(self.base.evaluate(np.array([x]))[0])
        points = self.base.breakpoints
        cuts = sorted(
            float((x - c) / self.delta) for c in points if abs(x - c) < self.delta
        )
        edges = [-1.0] + [c for c in cuts if -1.0 < c < 1.0] + [1.0]
        total = 0j
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            for part, take in ((1.0, np.real), (1j, np.imag)):
                value, _ = quad(
                    lambda y: float(bump(y)) * float(take(
                        complex(self.base.evaluate(np.array([x - self.delta * y]))[0]) - base_value
                    )),
                    lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200
                )
                total += part * value
        return total

    def defect(self, x) -> np.ndarray:
        """(base * phi_delta - base)(x)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        near = self._near(x)
        out = np.zeros(x.shape, dtype=complex)
        far = ~near
        if np.any(far):
            if self.delta < self.series_switch:
                out[far] = self._defect_series(x[far])
            else:
                out[far] = self._defect_vector(x[far])
        for i in np.flatnonzero(near):
            out[i] = self._defect_split(float(x[i]))
        return out

    def defect_bound(self, x) -> np.ndarray:
        """Upper bounds of |defect| usable at widths where direct quadrature
        loses all digits. Every node gets delta * m1 * sup |base'| over its
        window plus the jumps inside it. Away from breakpoints the even moment
        series with its Taylor remainder delta^8 m8 / 8! sup |base^(8)| is
        taken where it is smaller.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.delta >= self.series_switch:
            return np.abs(self.defect(x))
        lower, upper = x - self.delta, x + self.delta
        jumps = np.zeros(x.shape, dtype=float)
        for jump in self.base.jumps:
            jumps += np.where(np.abs(x - jump.location) <= self.delta, jump.magnitude, 0.0)
        out = self.delta * mollifier_moment(1) * derivative_bounds(self.base, 1, lower, upper) + jumps
        far = ~self._near(x)
        if np.any(far):
            coefficient = (
                self.delta ** REMAINDER_ORDER * mollifier_moment(REMAINDER_ORDER)
                / math.factorial(REMAINDER_ORDER)
            )
            remainder = derivative_bounds(self.base, REMAINDER_ORDER, lower[far], upper[far])
            series = np.abs(self._defect_series(x[far])) + coefficient * remainder
            out[far] = np.fmin(out[far], series)
        return out

    # -- evaluation -----------------------------------------------------------

    def convolution(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.base.evaluate(x) + self.defect(x)

    def __call__(self, x):
        x_array = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x_array).reshape(-1)
        values = self.convolution(flat)
        if self.offset is not None:
            values = values + self.offset.evaluate(flat)
        if x_array.ndim == 0:
            return complex(values[0])
        return values.reshape(x_array.shape)

    # -- serialization --------------------------------------------------------

    def spec(self) -> Dict[str, Any]:
        spec = {
            "kind": "mollified",
            "name": self.name,
            "base": self.base.spec(),
            "delta": self.delta,
        }
        if self.offset is not None:
            spec["offset"] = self.offset.spec()
        return spec

    @classmethod
    def from_spec(cls, spec: Dict[str, Any]) -> "MollifiedSymbol":
        unknown = set(spec) - MOLLIFIED_KEYS
        if unknown:
            raise SpecParseError(f"Unknown keys in mollified symbol spec: {sorted(unknown)}")
        try:
            base = Symbol.from_spec(spec["base"])
            offset = Symbol.from_spec(spec["offset"]) if "offset" in spec else None
            delta = float(spec["delta"])
        except (KeyError, TypeError, ValueError) as e:
            raise SpecParseError(f"Malformed mollified symbol spec: {e}") from e
        if not delta > 0:
            raise SpecParseError(f"Mollification width must be positive, got {delta}")
        get_logger(__name__).debug(f"Loaded mollified symbol with delta={delta}")
        return cls(base, delta, offset, name=spec.get("name"))

    def __repr__(self) -> str:
        return f"MollifiedSymbol({self.base.name!r}, delta={self.delta:g})"
