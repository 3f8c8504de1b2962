"""Reductions of continuous and piecewise continuous symbols to symbols
vanishing at infinity, and rational approximation in the Wiener algebra.
"""
import math

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from scipy import fft as sfft

from vlex_multipliers.errors import NotDotContinuous, NotInWienerForm, PreconditionError
from vlex_multipliers.exponent.VariableExponent import VariableExponent
from vlex_multipliers.pipelines.ApproximationCertificate import ApproximationCertificate
from vlex_multipliers.pipelines.probes import ProbeLayout
from vlex_multipliers.pipelines.vanishing import certify_c0_cloud, certify_c0_variation
from vlex_multipliers.symbols.Symbol import JUMP_TOLERANCE, SPEC_TOLERANCE, MultiplierSymbol, Symbol
from vlex_multipliers.symbols.constructions import blaschke_rational, jump_killer_at, jump_killer_infinity
from vlex_multipliers.utils import get_logger, encode_complex

METHODS = ("cloud", "variation")
NODES_PER_DEGREE = 64
COEFFICIENT_CUTOFF = 1e-14
RATIONAL_PROBE_RADIUS = 2.0 ** 20


def reduce_to_dot(a: Symbol) -> Tuple[complex, Symbol]:
    """Splits a continuous symbol with equal limits into a(inf) + rest.

    :raises NotDotContinuous: the limits differ by more than 1e-9, a limit
        is missing or a jumps
    :return: (a(inf), a - a(inf)) with rest vanishing at +-inf
    """
    left, right = a.limits
    if left is None or right is None:
        raise NotDotContinuous(f"Symbol {a.name!r} has no limit at -inf or +inf")
    if abs(left - right) > SPEC_TOLERANCE * max(1.0, abs(left), abs(right)):
        raise NotDotContinuous(f"Symbol {a.name!r} has limits {left} and {right}")
    if a.jumps:
        raise NotDotContinuous(f"Symbol {a.name!r} jumps at {[j.location for j in a.jumps]}")
    constant = complex(right)
    rest = (a - constant).renamed(f"{a.name}-{encode_complex(constant)}")
    return constant, rest


def remove_jumps(b: Symbol) -> Tuple[Symbol, Symbol]:
    """Subtracts a hat at every finite jump and the killer of the jump at
    infinity.

    :raises PreconditionError: a limit at +-inf is missing
    :return: (killer_sum, b - killer_sum)
    """
    left, right = b.limits
    if left is None or right is None:
        raise PreconditionError(f"Symbol {b.name!r} has no limit at -inf or +inf")
    killers = jump_killer_infinity((left, right))
    for jump in b.jumps:
        killers = killers + jump_killer_at(jump.location, jump.left, jump.right)
    killers = killers.renamed(f"K[{b.name}]")
    rest = (b - killers).renamed(f"{b.name}-K")

    if rest.jumps:
        raise RuntimeError(f"Jump removal of {b.name!r} left jumps at {[j.location for j in rest.jumps]}")
    get_logger(__name__).debug(f"Removed {len(b.jumps)} finite jumps and the jump at infinity of {b.name!r}")
    return killers, rest


@dataclass(frozen=True)
class RationalApproximation:
    """b = c + sum_{k != 0} c_k (r_k - 1), r_k = ((x-i)/(x+i))^k.

    Attributes:
        symbol: the approximating symbol with its Wiener form
        constant: c = a(inf)
        coefficients: c_k for -n <= k <= n, k != 0, above the cutoff
        degree: n
        nodes: trapezoid nodes on the circle
        sup_error: sampled sup |a - b|
    """
    symbol: Symbol
    constant: complex
    coefficients: Dict[int, complex]
    degree: int
    nodes: int
    sup_error: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "symbol": self.symbol.spec(),
            "constant": encode_complex(self.constant),
            "coefficients": {str(k): encode_complex(v) for k, v in sorted(self.coefficients.items())},
            "degree": self.degree,
            "nodes": self.nodes,
            "sup_error": self.sup_error,
        }


def cayley_nodes(count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Angles 2 pi m / count and their points x = -cot(phi/2); phi = 0 maps to infinity."""
    angles = 2.0 * math.pi * np.arange(count) / count
    points = np.full(count, np.inf)
    points[1:] = -1.0 / np.tan(angles[1:] / 2.0)
    return angles, points


def wiener_rational_approx(
        a: MultiplierSymbol,
        n: int,
        layout: Optional[ProbeLayout] = None
    ) -> RationalApproximation:
    """Degree-n rational approximation of a symbol in Wiener form.

    The Fourier coefficients of (a - c) pulled back to the unit circle by
    z = (x-i)/(x+i) are computed by the trapezoid rule on at least 64n
    nodes. The constant term is replaced so that b(inf) = c exactly.

    :raises NotInWienerForm: a has no Wiener representation
    """
    form = a.wiener_form
    if form is None:
        raise NotInWienerForm(f"Symbol {a.name!r} has no known Wiener representation")
    if n < 1:
        raise ValueError(f"Degree must be at least 1, got {n}")
    if layout is None:
        layout = ProbeLayout.from_defaults()
    c = complex(form.constant)

    count = 1 << int(math.ceil(math.log2(NODES_PER_DEGREE * n)))
    _, points = cayley_nodes(count)
    pulled = np.zeros(count, dtype=complex)
    pulled[1:] = a.evaluate(points[1:]) - c
    spectrum = sfft.fft(pulled) / count

    raw = {k: complex(spectrum[k % count]) for k in range(-n, n + 1) if k != 0}
    scale = max([1.0] + [abs(v) for v in raw.values()])
    coefficients = {k: v for k, v in raw.items() if abs(v) > COEFFICIENT_CUTOFF * scale}

    symbol = Symbol.constant(c)
    for k, value in sorted(coefficients.items()):
        symbol = symbol + (blaschke_rational(k) - 1.0) * value
    symbol = symbol.renamed(f"R{n}[{a.name}]")

    nodes = layout.nodes(RATIONAL_PROBE_RADIUS, a.breakpoints)
    sup_error = float(np.max(np.abs(a.evaluate(nodes) - symbol.evaluate(nodes))))
    get_logger(__name__).debug(
        f"Rational approximation of {a.name!r}: degree {n}, {count} nodes, "
        f"{len(coefficients)} coefficients, sup error {sup_error:.3g}"
    )
    return RationalApproximation(symbol, c, coefficients, n, count, sup_error)


def _certify_rest(
        rest: Symbol,
        p: VariableExponent,
        epsilon: float,
        method: str,
        options: Dict[str, Any]
    ) -> ApproximationCertificate:
    if method == "cloud":
        return certify_c0_cloud(rest, p, epsilon=epsilon, **options)
    if method == "variation":
        return certify_c0_variation(rest, p, epsilon=epsilon, **options)
    raise ValueError(f"Unknown certificate method {method!r}, use one of {METHODS}")


def certify_dot_continuous(
        a: Symbol,
        p: VariableExponent,
        epsilon: float,
        method: str = "cloud",
        **options
    ) -> ApproximationCertificate:
    """Certificate for a = a(inf) + rest; the constant is kept exactly.

    :param options: keyword arguments of ``certify_c0_cloud`` or
        ``certify_c0_variation`` other than the symbol, p and epsilon
    :raises NotDotContinuous: limits differ or a jumps
    """
    constant, rest = reduce_to_dot(a)
    certificate = _certify_rest(rest, p, epsilon, method, options)
    return certificate.with_offset(
        Symbol.constant(constant), "dot", a, {"offset": encode_complex(constant), "method": method}
    )


def certify_bar_continuous(
        a: Symbol,
        p: VariableExponent,
        epsilon: float,
        method: str = "cloud",
        **options
    ) -> ApproximationCertificate:
    """Certificate for a = J_a(inf) + rest with a continuous on the line.

    :raises PreconditionError: a jumps or has no limits
    """
    left, right = a.limits
    if left is None or right is None:
        raise PreconditionError(f"Symbol {a.name!r} has no limit at -inf or +inf")
    if a.jumps:
        raise PreconditionError(f"Symbol {a.name!r} jumps at {[j.location for j in a.jumps]}; use the jumps mode")
    killer = jump_killer_infinity((left, right))
    rest = (a - killer).renamed(f"{a.name}-J")
    certificate = _certify_rest(rest, p, epsilon, method, options)
    return certificate.with_offset(killer, "bar", a, {"offset": killer.spec(), "method": method})


def certify_finite_jumps(
        b: Symbol,
        p: VariableExponent,
        epsilon: float,
        method: str = "cloud",
        **options
    ) -> ApproximationCertificate:
    """Certificate for b = killer_sum + rest after ``remove_jumps``."""
    killers, rest = remove_jumps(b)
    certificate = _certify_rest(rest, p, epsilon, method, options)
    return certificate.with_offset(
        killers, "jumps", b, {"offset": killers.spec(), "method": method, "jumps": len(b.jumps)}
    )


def jump_free(symbol: Symbol, threshold: float = 1e-6) -> bool:
    """No jump of at least ``threshold`` between the sampled one-sided values
    at the breakpoints."""
    for point in symbol.breakpoints:
        left = symbol.evaluate(np.array([np.nextafter(point, -np.inf)]))[0]
        right = symbol.evaluate(np.array([point]))[0]
        if abs(right - left) >= threshold:
            return False
    return all(j.magnitude < max(threshold, JUMP_TOLERANCE) for j in symbol.jumps)
