import csv
import math

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from scipy.optimize import brentq
from scipy.special import logsumexp

from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import InvalidExponent, NonFinite, SpecParseError
from vlex_multipliers.exponent.VariableExponent import VariableExponent

MIN_EXPONENT = 1.0 + 1e-6
MAX_EXPONENT = 1e6
ROOT_MAXITER = 500
CSV_HEADER = ("w", "p", "re", "im")


@dataclass(frozen=True, eq=False)
class DiscreteSpace:
    """Weighted finite sequence space with modular sum_i w_i |v_i|^p_i.

    Attributes:
        weights: w_i > 0
        exponents: p_i in (1 + 1e-6, 1e6)
    """
    weights: np.ndarray
    exponents: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).ravel()
        exponents = np.asarray(self.exponents, dtype=float).ravel()
        if weights.shape != exponents.shape or len(weights) == 0:
            raise ValueError(
                f"Weights and exponents need the same positive length, got {len(weights)} and {len(exponents)}"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
            raise ValueError("All weights of a discrete space must be positive and finite")
        if np.any(~(exponents > MIN_EXPONENT)) or np.any(~(exponents < MAX_EXPONENT)):
            raise InvalidExponent(
                f"Discrete exponents must lie in ({MIN_EXPONENT}, {MAX_EXPONENT}), "
                f"got range [{exponents.min()}, {exponents.max()}]"
            )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "exponents", exponents)

    @property
    def dimension(self) -> int:
        return len(self.weights)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.exponents == self.exponents[0]))

    @property
    def log_weights(self) -> np.ndarray:
        return np.log(self.weights)

    @classmethod
    def constant(cls, n: int, p: float, weights: Optional[Sequence[float]] = None) -> "DiscreteSpace":
        if weights is None:
            weights = np.ones(n)
        return cls(np.asarray(weights, dtype=float), np.full(n, float(p)))

    @classmethod
    def from_exponent(cls, p: VariableExponent, nodes: np.ndarray, step: float) -> "DiscreteSpace":
        """Samples p at the nodes; every node carries the weight ``step``."""
        nodes = np.asarray(nodes, dtype=float)
        return cls(np.full(len(nodes), float(step)), np.asarray(p(nodes), dtype=float))

    def interpolated(self, other: "DiscreteSpace", theta: float) -> "DiscreteSpace":
        """Space with 1/p_i = theta/p_i(self) + (1-theta)/p_i(other) and the
        weights of ``self``."""
        if other.dimension != self.dimension:
            raise ValueError(f"Cannot interpolate dimensions {self.dimension} and {other.dimension}")
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"Interpolation parameter must lie in [0, 1], got {theta}")
        inverse = theta / self.exponents + (1.0 - theta) / other.exponents
        return DiscreteSpace(self.weights, 1.0 / inverse)

    def conjugate(self) -> "DiscreteSpace":
        return DiscreteSpace(self.weights, self.exponents / (self.exponents - 1.0))

    def to_dict(self) -> Dict[str, Any]:
        return {"weights": self.weights.tolist(), "exponents": self.exponents.tolist()}

    def __repr__(self) -> str:
        return (
            f"DiscreteSpace(n={self.dimension}, p in [{self.exponents.min():g}, {self.exponents.max():g}])"
        )


def _check_vector(v, space: DiscreteSpace) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    if len(v) != space.dimension:
        raise ValueError(f"Vector of length {len(v)} does not belong to a space of dimension {space.dimension}")
    if not np.all(np.isfinite(v)):
        raise NonFinite("Cannot take the discrete norm of non-finite entries")
    return v


def _normalized_root(magnitude: np.ndarray, space: DiscreteSpace, rtol: float) -> float:
    """Root mu of sum w_i (u_i/mu)^p_i = 1 for max u_i = 1, found on the
    logarithmic scale s = log mu where the log-modular is decreasing."""
    support = magnitude > 0.0
    log_u = np.log(magnitude[support])
    p = space.exponents[support]
    log_w = space.log_weights[support]

    def log_modular(s: float) -> float:
        return float(logsumexp(p * (log_u - s) + log_w))

    peak = int(np.argmax(log_u))
    lo = min(0.0, log_w[peak] / p[peak])
    hi = max(0.0, float(logsumexp(log_w)) / float(p.min()))
    f_lo, f_hi = log_modular(lo), log_modular(hi)
    if f_lo <= 0.0:
        return math.exp(lo)
    if f_hi >= 0.0:
        return math.exp(hi)
    s = brentq(log_modular, lo, hi, xtol=rtol, rtol=4.0 * np.finfo(float).eps, maxiter=ROOT_MAXITER)
    return math.exp(s)


def discrete_luxemburg(v, space: DiscreteSpace, rtol: Optional[float] = None) -> float:
    """Luxemburg norm inf{lambda > 0 : sum_i w_i |v_i / lambda|^p_i <= 1}.

    Constant exponents use the closed form (sum w_i |v_i|^p)^(1/p). Variable
    exponents divide by M = max |v_i| and solve for the root on the log
    scale by a bracketing root finder, so the result is positively
    homogeneous up to rounding.

    :param v: complex vector
    :param space: discrete space of matching dimension
    :param rtol: relative tolerance of the root, '[luxemburg] discrete_rtol'
        by default
    :raises NonFinite: v has NaN or infinite entries
    :return: norm value, 0 for v = 0
    """
    v = _check_vector(v, space)
    magnitude = np.abs(v)
    peak = float(np.max(magnitude))
    if peak == 0.0:
        return 0.0
    if space.is_constant:
        r = float(space.exponents[0])
        u = magnitude / peak
        return peak * float(np.sum(space.weights * u ** r)) ** (1.0 / r)
    if rtol is None:
        rtol = get_defaults().discrete_rtol
    return peak * _normalized_root(magnitude / peak, space, rtol)


def luxemburg_gradient(v, norm: float, space: DiscreteSpace) -> np.ndarray:
    """Gradient of the norm with respect to (Re v, Im v), packed as a complex
    vector. With u = v / norm it equals g / S, where
    g_i = w_i p_i |u_i|^(p_i - 1) u_i/|u_i| and S = sum_i w_i p_i |u_i|^p_i.
    """
    v = np.asarray(v, dtype=complex)
    if norm == 0.0:
        return np.zeros_like(v)
    u = v / norm
    magnitude = np.abs(u)
    p = space.exponents
    with np.errstate(divide="ignore", invalid="ignore"):
        phase = np.where(magnitude > 0.0, u / np.where(magnitude > 0.0, magnitude, 1.0), 0.0)
    g = space.weights * p * magnitude ** (p - 1.0) * phase
    s = float(np.sum(space.weights * p * magnitude ** p))
    return g / s


def read_csv(path: str) -> Tuple[np.ndarray, DiscreteSpace]:
    """Reads a weighted sequence from a CSV file with header ``w,p,re,im``.

    :raises SpecParseError: on an empty file, a wrong header or malformed rows
    :return: the vector and its space
    """
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise SpecParseError(f"Sequence file '{path}' is empty")
    header = tuple(column.strip() for column in rows[0])
    if header != CSV_HEADER:
        raise SpecParseError(f"Sequence file '{path}' needs header {','.join(CSV_HEADER)}, got {header}")
    try:
        table = np.array([[float(value) for value in row] for row in rows[1:]], dtype=float)
    except ValueError as e:
        raise SpecParseError(f"Malformed row in sequence file '{path}': {e}") from e
    if table.size == 0:
        raise SpecParseError(f"Sequence file '{path}' has no entries")
    if table.ndim != 2 or table.shape[1] != 4:
        raise SpecParseError(f"Sequence file '{path}' needs exactly four columns")
    try:
        space = DiscreteSpace(table[:, 0], table[:, 1])
    except ValueError as e:
        raise SpecParseError(f"Invalid weights in '{path}': {e}") from e
    return table[:, 2] + 1j * table[:, 3], space
