"""Explicit symbols: cutoffs, mollifiers, jump killers, Blaschke rationals
and codomain quantization.
"""
import math

from typing import List, Optional, Tuple

import numpy as np
import sympy

from scipy.optimize import brentq

from vlex_multipliers.errors import UnboundedVariation
from vlex_multipliers.expressions import X
from vlex_multipliers.symbols.MollifiedSymbol import MollifiedSymbol, mollifier_constant
from vlex_multipliers.symbols.Symbol import Piece, Symbol, WienerForm
from vlex_multipliers.symbols.norms import _piece_nodes
from vlex_multipliers.utils import get_logger, encode_complex

INF = math.inf


def psi_n(n: int) -> Symbol:
    """Trapezoid cutoff: 1 on [-n, n], n+1-|x| on n < |x| < n+1, 0 outside."""
    if int(n) != n or n < 1:
        raise ValueError(f"psi_n needs an integer n >= 1, got {n}")
    n = sympy.Integer(int(n))
    return Symbol.piecewise(
        [-INF, -(n + 1), -n, n, n + 1, INF],
        [sympy.Integer(0), n + 1 + X, sympy.Integer(1), n + 1 - X, sympy.Integer(0)],
        values=[(0, 0), (0, 1), (1, 1), (1, 0), (0, 0)],
        name=f"psi_{int(n)}"
    )


def sgn() -> Symbol:
    """Sign function, right-continuous at 0."""
    return Symbol.piecewise([-INF, 0.0, INF], [sympy.Integer(-1), sympy.Integer(1)], name="sgn")


def unit_step(x0: float = 0.0, left: complex = 0.0, right: complex = 1.0) -> Symbol:
    return Symbol.piecewise(
        [-INF, float(x0), INF],
        [left, right],
        name=f"step({x0:g})"
    )


def mollifier(delta: float) -> Symbol:
    """phi_delta(x) = phi(x/delta)/delta as a piecewise symbol."""
    if not delta > 0:
        raise ValueError(f"Mollification width must be positive, got {delta}")
    d = sympy.Float(delta)
    inner = sympy.Float(mollifier_constant()) / d * sympy.exp(-1 / (1 - (X / d) ** 2))
    return Symbol.piecewise(
        [-INF, -delta, delta, INF],
        [sympy.Integer(0), inner, sympy.Integer(0)],
        values=[(0, 0), (0, 0), (0, 0)],
        name=f"phi[{delta:g}]"
    )


def convolve_mollify(a: Symbol, delta: float, offset: Optional[Symbol] = None) -> MollifiedSymbol:
    return MollifiedSymbol(a, delta, offset)


def jump_killer_infinity(limits: Tuple[complex, complex]) -> Symbol:
    """Continuous function equal to f(-inf) left of -1, f(+inf) right of 1
    and (f(-inf)(1-x) + f(+inf)(1+x))/2 in between.
    """
    left, right = complex(limits[0]), complex(limits[1])
    name = f"J_inf({encode_complex(left)},{encode_complex(right)})"
    if left == right:
        return Symbol.constant(left, name=name)
    l_expr, r_expr = encode_complex_expr(left), encode_complex_expr(right)
    return Symbol.piecewise(
        [-INF, -1.0, 1.0, INF],
        [l_expr, (l_expr * (1 - X) + r_expr * (1 + X)) / 2, r_expr],
        values=[(left, left), (left, right), (right, right)],
        name=name
    )


def jump_killer_at(x0: float, left: complex, right: complex) -> Symbol:
    """Hat on [x0-1, x0+1]: left*(x-x0+1) on [x0-1, x0), right*(x0+1-x) on
    [x0, x0+1], zero outside. It jumps from ``left`` to ``right`` at x0.
    """
    left, right = complex(left), complex(right)
    l_expr, r_expr = encode_complex_expr(left), encode_complex_expr(right)
    x0 = float(x0)
    c = sympy.Float(x0)
    return Symbol.piecewise(
        [-INF, x0 - 1.0, x0, x0 + 1.0, INF],
        [sympy.Integer(0), l_expr * (X - c + 1), r_expr * (c + 1 - X), sympy.Integer(0)],
        values=[(0, 0), (0, left), (right, 0), (0, 0)],
        name=f"J_{x0:g}({encode_complex(left)},{encode_complex(right)})"
    )


def encode_complex_expr(value: complex) -> sympy.Expr:
    if value.imag == 0.0:
        return sympy.Float(value.real)
    return sympy.Float(value.real) + sympy.Float(value.imag) * sympy.I


def _blaschke_density(k: int) -> Symbol:
    """Density f with ((x-i)/(x+i))^k = 1 + F f: for k > 0,
    f(t) = sum_{m=1..k} C(k,m) (-2)^m t^(m-1)/(m-1)! e^(-t) on t > 0.
    Negative k mirrors the density to t < 0.
    """
    m_range = range(1, abs(k) + 1)
    t = X if k > 0 else -X
    polynomial = sum(
        sympy.binomial(abs(k), m) * (-2) ** m * t ** (m - 1) / sympy.factorial(m - 1)
        for m in m_range
    )
    density = polynomial * sympy.exp(-t)
    zero = sympy.Integer(0)
    if k > 0:
        return Symbol.piecewise([-INF, 0.0, INF], [zero, density], name=f"density_r{k}")
    return Symbol.piecewise([-INF, 0.0, INF], [density, zero], name=f"density_r{k}")


def blaschke_rational(k: int) -> Symbol:
    """r_k(x) = ((x-i)/(x+i))^k, unimodular with limit 1 at both ends."""
    k = int(k)
    if k == 0:
        return Symbol.constant(1.0, name="r_0")
    expr = ((X - sympy.I) / (X + sympy.I)) ** k
    return Symbol(
        [Piece(-INF, INF, expr)],
        name=f"r_{k}",
        limits=(1.0 + 0j, 1.0 + 0j),
        wiener=WienerForm(1.0 + 0j, _blaschke_density(k))
    )


# -- quantization ---------------------------------------------------------------

def _level(value: float, step: float, previous: Optional[int]) -> int:
    scaled = value / step + 0.5
    level = math.floor(scaled)
    if scaled == level and previous is not None and previous in (level - 1, level):
        # exactly on a midpoint: keep the previous level
        return previous
    return level


def _crossings(piece: Piece, component, step: float) -> List[float]:
    """Points inside the piece where the component crosses a level midpoint."""
    nodes = _piece_nodes(piece.lower, piece.upper)
    values = component(piece(nodes))
    finite = np.isfinite(values)
    nodes, values = nodes[finite], values[finite]
    levels = np.floor(values / step + 0.5)
    points = []
    for i in np.flatnonzero(levels[1:] != levels[:-1]):
        lo, hi = nodes[i], nodes[i + 1]
        low_level, high_level = sorted((levels[i], levels[i + 1]))
        for level in np.arange(low_level, high_level):
            midpoint = (level + 0.5) * step

            def offset(t, midpoint=midpoint):
                return float(component(piece(np.array([t])))[0]) - midpoint

            f_lo, f_hi = offset(lo), offset(hi)
            if f_lo == 0.0:
                points.append(lo)
            elif f_hi == 0.0:
                points.append(hi)
            elif f_lo * f_hi < 0:
                points.append(brentq(offset, lo, hi, xtol=1e-14, rtol=1e-14))
    return points


def _probe(lower: float, upper: float) -> float:
    if math.isinf(lower) and math.isinf(upper):
        return 0.0
    if math.isinf(lower):
        return upper - 1.0
    if math.isinf(upper):
        return lower + 1.0
    return 0.5 * (lower + upper)


def pc0_quantize(a: Symbol, step: float) -> Symbol:
    """Piecewise constant b with values in step*Z (per real and imaginary
    part) and |b - a| <= step/2 per part, obtained by rounding to the
    nearest lattice point with breakpoints at the midpoint crossings.

    :param a: symbol of finite variation
    :param step: lattice step h_q
    :raises UnboundedVariation: a has no limits at +-inf
    :return: piecewise constant symbol
    """
    if not step > 0:
        raise ValueError(f"Quantization step must be positive, got {step}")
    if any(limit is None for limit in a.limits):
        raise UnboundedVariation(f"Cannot quantize {a.name!r} without limits at infinity")
    components = [np.real] if a.is_real else [np.real, np.imag]

    bounds = [-INF]
    for piece in a.pieces:
        cuts = set()
        if not piece.is_constant:
            for component in components:
                cuts.update(_crossings(piece, component, step))
        cuts = sorted(c for c in cuts if piece.lower < c < piece.upper)
        bounds.extend(cuts)
        bounds.append(piece.upper)

    values = []
    previous = [None] * len(components)
    for lower, upper in zip(bounds[:-1], bounds[1:]):
        value = complex(a(_probe(lower, upper)))
        levels = []
        for index, component in enumerate(components):
            level = _level(float(component(value)), step, previous[index])
            previous[index] = level
            levels.append(level)
        quantized = levels[0] * step + (1j * levels[1] * step if len(levels) > 1 else 0.0)
        values.append(quantized)

    pieces = [
        Piece(lower, upper, encode_complex_expr(value))
        for lower, upper, value in zip(bounds[:-1], bounds[1:], values)
    ]
    quantized = Symbol(pieces, name=f"Q[{a.name}]").merged()
    get_logger(__name__).debug(
        f"Quantized {a.name!r} with step {step:g} into {len(quantized.pieces)} pieces"
    )
    return quantized
