"""Modular, Luxemburg norm and indicator constants on uniform grids."""
import math

from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from scipy.integrate import trapezoid
from scipy.optimize import bisect

from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import IntervalOutOfGrid, NonFinite
from vlex_multipliers.exponent.VariableExponent import VariableExponent, ConstantExponent
from vlex_multipliers.exponent.transforms import conjugate
from vlex_multipliers.grid.GridFunction import Grid, GridFunction
from vlex_multipliers.utils import get_logger

MAX_BRACKET_DOUBLINGS = 2000
BISECTION_MAXITER = 200
DYADIC_LEVELS = range(-2, 5)
DYADIC_WINDOW = 4.0


def modular(f: GridFunction, p: VariableExponent, lam: float) -> float:
    """Trapezoid quadrature of |f(t_j)/lambda|^p(t_j)."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    with np.errstate(over="ignore"):
        integrand = np.power(f.magnitude / lam, p(f.nodes))
    return float(trapezoid(integrand, dx=f.grid.step))


def lp_integral_norm(f: GridFunction, r: float) -> float:
    """(trapezoid of |f|^r)^(1/r), the constant-exponent Luxemburg norm."""
    return float(trapezoid(f.magnitude ** r, dx=f.grid.step)) ** (1.0 / r)


def l2_norm(f: GridFunction) -> float:
    """Rectangle-rule L2 norm; on periodic grids it satisfies the discrete
    Parseval identity exactly.
    """
    return math.sqrt(f.grid.step * float(np.sum(f.magnitude ** 2)))


def _root_of_modular(
        modular_of: Callable[[float], float],
        lo: float,
        hi: float,
        rtol: float,
        description: str
    ) -> float:
    doublings = 0
    while modular_of(lo) < 1.0:
        lo /= 2.0
        doublings += 1
        if doublings > MAX_BRACKET_DOUBLINGS:
            raise RuntimeError(f"Could not bracket the norm of {description} from below")
    while modular_of(hi) > 1.0:
        hi *= 2.0
        doublings += 1
        if doublings > MAX_BRACKET_DOUBLINGS:
            raise RuntimeError(f"Could not bracket the norm of {description} from above")
    if lo == hi:
        return lo
    return float(bisect(
        lambda lam: modular_of(lam) - 1.0,
        lo,
        hi,
        rtol=rtol,
        maxiter=BISECTION_MAXITER
    ))


def luxemburg_norm(f: GridFunction, p: VariableExponent, rtol: Optional[float] = None) -> float:
    """Luxemburg norm inf{lambda > 0 : modular(f, p, lambda) <= 1}.

    Constant exponents use the closed form of the same quadrature. Variable
    exponents bracket the root starting from
    [M min(1, (2L)^(-1/p_minus)), M max(1, (2L)^(1/p_minus))], M = max|f|,
    double outward until the modular crosses 1, then bisect.

    :param f: grid function
    :param p: exponent
    :param rtol: relative bisection tolerance, '[luxemburg] rtol' by default
    :raises NonFinite: if f has non-finite samples
    :return: norm value, 0 for f = 0
    """
    if not np.all(np.isfinite(f.samples)):
        raise NonFinite("Cannot take the norm of non-finite samples")
    if f.is_zero:
        return 0.0
    if isinstance(p, ConstantExponent) or p.is_constant:
        return lp_integral_norm(f, p.p_minus)
    if rtol is None:
        rtol = get_defaults().luxemburg_rtol

    peak = f.sup
    width = 2.0 * f.grid.half_width
    lo = peak * min(1.0, width ** (-1.0 / p.p_minus))
    hi = peak * max(1.0, width ** (1.0 / p.p_minus))
    return _root_of_modular(lambda lam: modular(f, p, lam), lo, hi, rtol, "grid function")


def _segment_nodes(grid: Grid, a: float, b: float) -> np.ndarray:
    t = grid.nodes
    inner = t[(t > a) & (t < b)]
    return np.concatenate([[a], inner, [b]])


def indicator_norm(p: VariableExponent, a: float, b: float, grid: Grid, rtol: Optional[float] = None) -> float:
    """Norm of chi_(a,b) in L^p(.), with the modular integrated by the
    trapezoid rule on [a, grid nodes inside (a, b), b].
    """
    if isinstance(p, ConstantExponent) or p.is_constant:
        return (b - a) ** (1.0 / p.p_minus)
    if rtol is None:
        rtol = get_defaults().luxemburg_rtol
    t = _segment_nodes(grid, a, b)
    exponents = p(t)

    def modular_of(lam: float) -> float:
        with np.errstate(over="ignore"):
            return float(trapezoid(np.power(1.0 / lam, exponents), t))

    length = b - a
    lo = min(1.0, length ** (1.0 / p.p_plus), length ** (1.0 / p.p_minus))
    hi = max(1.0, length ** (1.0 / p.p_plus), length ** (1.0 / p.p_minus))
    return _root_of_modular(modular_of, lo, hi, rtol, f"chi_({a}, {b})")


def dyadic_intervals(grid: Grid, window: float = DYADIC_WINDOW) -> List[Tuple[float, float]]:
    """Dyadic intervals [k 2^-j, (k+1) 2^-j] for j = -2..4 inside
    [-window, window] and strictly inside the grid.
    """
    intervals = []
    reach = min(window, grid.half_width)
    for level in DYADIC_LEVELS:
        length = 2.0 ** (-level)
        first = math.ceil(-reach / length)
        last = math.floor(reach / length) - 1
        for k in range(first, last + 1):
            a, b = k * length, (k + 1) * length
            if -grid.half_width < a and b < grid.half_width:
                intervals.append((a, b))
    return intervals


def averaged_indicator_constant(
        p: VariableExponent,
        intervals: Optional[Sequence[Tuple[float, float]]] = None,
        grid: Optional[Grid] = None
    ) -> float:
    """Lower estimate of sup over intervals of
    (1/(b-a)) ||chi_(a,b)||_p(.) ||chi_(a,b)||_p'(.).

    :param p: exponent
    :param intervals: pairs (a, b); a dyadic family by default
    :param grid: grid whose window must contain the intervals, the default
        grid of '[grid]' when omitted
    :raises IntervalOutOfGrid: an interval is empty or leaves (-L, L)
    :return: maximum over the supplied intervals
    """
    if grid is None:
        defaults = get_defaults()
        grid = Grid(defaults.grid_half_width, defaults.grid_count)
    if intervals is None:
        intervals = dyadic_intervals(grid)
    p_conjugate = conjugate(p)

    best = 0.0
    for a, b in intervals:
        if not a < b:
            raise IntervalOutOfGrid(f"Interval ({a}, {b}) is empty")
        if not (-grid.half_width < a and b < grid.half_width):
            raise IntervalOutOfGrid(
                f"Interval ({a}, {b}) is not inside (-{grid.half_width}, {grid.half_width})"
            )
        value = indicator_norm(p, a, b, grid) * indicator_norm(p_conjugate, a, b, grid) / (b - a)
        best = max(best, value)
    get_logger(__name__).debug(f"Averaged indicator estimate over {len(intervals)} intervals: {best}")
    return best
