"""Discrete Fourier transform in the convention (F f)(x) = int f(t) e^{ixt} dt,
multiplier operators W^0(a) = F^{-1} a F and the Cauchy singular integral.
"""
import math

from typing import Optional, Sequence

import numpy as np

from scipy import fft as sfft
from scipy.integrate import trapezoid

from vlex_multipliers.errors import DecayViolation
from vlex_multipliers.grid.GridFunction import Grid, GridFunction
from vlex_multipliers.symbols.Symbol import MultiplierSymbol, Symbol
from vlex_multipliers.symbols.constructions import sgn
from vlex_multipliers.utils import get_logger


def _alternating(count: int) -> np.ndarray:
    return np.where(np.arange(count) % 2 == 0, 1.0, -1.0)


def fourier(f: GridFunction) -> GridFunction:
    """(F f)(x_k) ~ h sum_j f(t_j) e^{i x_k t_j} on the dual grid
    x_k = -pi/h + k 2pi/(N h).

    With N/2 even the phase factors reduce to alternating signs, so
    (F f)[k] = h (-1)^k N ifft((-1)^j f_j)[k].

    :raises DecayViolation: boundary samples exceed 1e-8 of the maximum
    """
    if not f.decays:
        raise DecayViolation(
            f"Boundary samples {abs(f.samples[0]):.3g}, {abs(f.samples[-1]):.3g} "
            f"do not decay against max {f.sup:.3g}"
        )
    grid = f.grid
    signs = _alternating(grid.count)
    spectrum = grid.step * signs * grid.count * sfft.ifft(signs * f.samples)
    return GridFunction(grid.dual(), spectrum)


def inverse_fourier(g: GridFunction, grid: Optional[Grid] = None) -> GridFunction:
    """f(t_j) ~ (1/2pi) sum_k g(x_k) e^{-i x_k t_j} dx, i.e.
    f_j = (-1)^j fft((-1)^k g_k)[j] / (N h).

    :param g: samples on a dual grid
    :param grid: time grid; the dual of ``g.grid`` when omitted
    """
    if grid is None:
        grid = g.grid.dual()
    if grid.count != g.grid.count:
        raise ValueError(f"Grid {grid} does not match spectrum of {g.grid.count} samples")
    signs = _alternating(grid.count)
    samples = signs * sfft.fft(signs * g.samples) / (grid.count * grid.step)
    return GridFunction(grid, samples)


def sample_symbol(a: MultiplierSymbol, nodes: np.ndarray) -> np.ndarray:
    values = a.evaluate(nodes)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"Symbol {a.name!r} is not finite on the dual grid")
    return values


def apply_multiplier(a: MultiplierSymbol, f: GridFunction) -> GridFunction:
    """W^0(a) f = F^{-1}(a F f) on the grid of f.

    :raises DecayViolation: f does not decay inside its grid
    """
    spectrum = fourier(f)
    values = sample_symbol(a, spectrum.nodes)
    return inverse_fourier(GridFunction(spectrum.grid, values * spectrum.samples), grid=f.grid)


def cauchy_symbol() -> Symbol:
    """Symbol of S f(x) = (1/(pi i)) PV int f(t)/(t-x) dt in this Fourier
    convention, which is -sgn.
    """
    return (-sgn()).renamed("S")


def cauchy_singular(f: GridFunction) -> GridFunction:
    return apply_multiplier(cauchy_symbol(), f)


def _node_derivative(samples: np.ndarray, index: int, step: float) -> complex:
    """Fourth order central difference, second order at the border."""
    count = len(samples)
    if 2 <= index < count - 2:
        return (-samples[index + 2] + 8 * samples[index + 1]
                - 8 * samples[index - 1] + samples[index - 2]) / (12 * step)
    if 1 <= index < count - 1:
        return (samples[index + 1] - samples[index - 1]) / (2 * step)
    return 0.0


def principal_value_oracle(f: GridFunction, indices: Sequence[int]) -> np.ndarray:
    """(1/(pi i)) PV int f(t)/(t - x) dt at the nodes x = t[indices].

    The singularity is subtracted: int (f(t) - f(x))/(t - x) dt is a smooth
    integral taken by the trapezoid rule, with the derivative f'(x) at the
    excised node, and f(x) log|(t_end - x)/(t_start - x)| is added in closed form.
    """
    t = f.nodes
    samples = f.samples
    out = np.empty(len(indices), dtype=complex)
    for n, index in enumerate(indices):
        index = int(index)
        x = t[index]
        offsets = t - x
        offsets[index] = 1.0
        quotient = (samples - samples[index]) / offsets
        quotient[index] = _node_derivative(samples, index, f.grid.step)
        value = trapezoid(quotient, dx=f.grid.step)
        value += samples[index] * math.log(abs((t[-1] - x) / (t[0] - x)))
        out[n] = value / (math.pi * 1j)
    get_logger(__name__).debug(f"Principal value oracle evaluated at {len(indices)} nodes")
    return out

