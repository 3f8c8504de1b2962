import math

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np

from vlex_multipliers.errors import NotLogHoelder
from vlex_multipliers.exponent.VariableExponent import (
    VariableExponent,
    ConstantExponent,
    PiecewiseLinearExponent,
    ClosedFormExponent,
    DerivedExponent,
    DerivedMap,
    apply_map,
    probe_nodes
)
from vlex_multipliers.utils import get_logger

PAIR_SAMPLE_COUNT = 513
SEGMENT_SUBDIVISIONS = 64
TAIL_TOLERANCE = 1e-12


class CertificateMethod(Enum):
    ANALYTIC = "analytic-for-piecewise-linear"
    SAMPLED = "sampled-lower-estimate"


@dataclass(frozen=True)
class LHCertificate:
    """Constants of the log-Hoelder conditions

        |p(x) - p(y)| <= c0 / log(e + 1/|x-y|)
        |p(x) - p_inf| <= c_infinity / log(e + |x|)

    Attributes:
        c0: local constant
        c_infinity: decay constant at infinity
        p_infinity: common limit of p at +-inf
        method: ``ANALYTIC`` for certified constants, ``SAMPLED`` for lower
            estimates that must not be used as certificates
    """
    c0: float
    c_infinity: float
    p_infinity: float
    method: CertificateMethod

    @property
    def certified(self) -> bool:
        return self.method is CertificateMethod.ANALYTIC

    def scaled(self, factor: float, p_infinity: float) -> "LHCertificate":
        return LHCertificate(
            self.c0 * factor,
            self.c_infinity * factor,
            p_infinity,
            self.method
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c0": self.c0,
            "c_infinity": self.c_infinity,
            "p_infinity": self.p_infinity,
            "method": self.method.value,
        }


def local_constant(slope: float, spread: float) -> float:
    """sup over t > 0 of min(slope*t, spread)*log(e + 1/t).

    The product is increasing on t <= spread/slope and decreasing after,
    so the supremum sits at t = spread/slope.
    """
    if spread <= 0.0 or slope <= 0.0:
        return 0.0
    return spread * math.log(math.e + slope / spread)


def propagation_factor(
        mapping: DerivedMap,
        parent_bounds,
        theta: float = 0.0,
        p0: float = 2.0
    ) -> float:
    """Bound of |g'(s)| over [p_minus, p_plus] for the exponent map g, so
    that |g(p(x)) - g(p(y))| <= factor * |p(x) - p(y)|.
    """
    lo, hi = parent_bounds
    if mapping is DerivedMap.CONJUGATE:
        return 1.0 / (lo - 1.0) ** 2
    if mapping is DerivedMap.THETA:
        return 4.0 * (1.0 - theta) / (2.0 - theta * hi) ** 2
    return (1.0 - theta) / (1.0 - theta * hi / p0) ** 2


def lh_certificate(p: VariableExponent) -> LHCertificate:
    """Log-Hoelder constants of an exponent.

    Constant and continuous piecewise-linear exponents with equal tails get
    analytic certificates. Closed-form exponents get sampled lower estimates
    flagged as such. Derived exponents inherit the parent's certificate,
    scaled by the Lipschitz constant of the map.

    :param p: exponent
    :raises NotLogHoelder: tails differ or p is discontinuous
    :return: certificate
    """
    if p.certificate is not None:
        return p.certificate
    if isinstance(p, ConstantExponent):
        return LHCertificate(0.0, 0.0, p.value, CertificateMethod.ANALYTIC)
    if isinstance(p, PiecewiseLinearExponent):
        return _piecewise_linear_certificate(p)
    if isinstance(p, DerivedExponent):
        parent = lh_certificate(p.parent)
        factor = propagation_factor(p.mapping, p.parent.bounds, p.theta, p.p0)
        p_infinity = float(apply_map(p.mapping, parent.p_infinity, p.theta, p.p0))
        return parent.scaled(factor, p_infinity)
    if isinstance(p, ClosedFormExponent):
        return _sampled_certificate(p)
    raise NotLogHoelder(f"No log-Hoelder rule for exponent kind {p.kind.value}")


def _common_tail(p: VariableExponent) -> float:
    left, right = p.tails
    if left is None or right is None:
        raise NotLogHoelder("Exponent has no limit at infinity")
    if abs(left - right) > TAIL_TOLERANCE:
        raise NotLogHoelder(
            f"Tails differ ({left} at -inf, {right} at +inf); no single p_infinity"
        )
    return float(left)


def _piecewise_linear_certificate(p: PiecewiseLinearExponent) -> LHCertificate:
    p_infinity = _common_tail(p)
    if not p.is_continuous:
        raise NotLogHoelder("Piecewise-linear exponent jumps at an outer knot")

    spread = p.p_plus - p.p_minus
    c0 = local_constant(p.max_slope, spread)

    # rigorous bound per sub-segment: linear |p - p_inf| is maximal at an
    # end point, log(e + |x|) at the end point farther from 0
    c_infinity = 0.0
    xs, ps = p.knot_positions, p.knot_values
    for i in range(len(xs) - 1):
        cuts = np.linspace(xs[i], xs[i + 1], SEGMENT_SUBDIVISIONS + 1)
        deviation = np.abs(np.interp(cuts, xs, ps) - p_infinity)
        local = np.maximum(deviation[:-1], deviation[1:])
        reach = np.maximum(np.abs(cuts[:-1]), np.abs(cuts[1:]))
        c_infinity = max(c_infinity, float(np.max(local * np.log(math.e + reach))))
    if len(xs) == 1:
        c_infinity = abs(ps[0] - p_infinity) * math.log(math.e + abs(xs[0]))

    return LHCertificate(c0, c_infinity, p_infinity, CertificateMethod.ANALYTIC)


def _sampled_certificate(p: ClosedFormExponent) -> LHCertificate:
    p_infinity = _common_tail(p)
    half_width = p.domain_halfwidth

    xs = np.linspace(-half_width, half_width, PAIR_SAMPLE_COUNT)
    values = p(xs)
    distance = np.abs(xs[:, None] - xs[None, :])
    np.fill_diagonal(distance, np.inf)
    c0 = float(np.max(
        np.abs(values[:, None] - values[None, :]) * np.log(math.e + 1.0 / distance)
    ))

    nodes = probe_nodes(half_width)
    c_infinity = float(np.max(np.abs(p(nodes) - p_infinity) * np.log(math.e + np.abs(nodes))))

    get_logger(__name__).debug(
        f"Sampled log-Hoelder estimate for {p.expr!r}: c0={c0}, c_inf={c_infinity}"
    )
    return LHCertificate(c0, c_infinity, p_infinity, CertificateMethod.SAMPLED)


def certified(p: VariableExponent) -> VariableExponent:
    """Returns p with its log-Hoelder certificate attached."""
    return p.with_certificate(lh_certificate(p))
