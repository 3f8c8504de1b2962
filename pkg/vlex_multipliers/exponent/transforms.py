"""Exponent-level formulas: conjugate exponents, the interpolation range of
an exponent, the p_theta transform, the two-exponent decomposition and the
range R_p of constant exponents.
"""
import math

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from vlex_multipliers.errors import BadDecomposition, ThetaOutOfRange, InvalidExponent
from vlex_multipliers.exponent.VariableExponent import (
    VariableExponent,
    ConstantExponent,
    DerivedExponent,
    DerivedMap,
    apply_map
)
from vlex_multipliers.exponent.LogHoelder import propagation_factor

THETA_GUARD = 1e-9
DECOMPOSITION_TOLERANCE = 1e-9


def conjugate(p: VariableExponent) -> VariableExponent:
    """Conjugate exponent p'(x) = p(x)/(p(x)-1); conjugating twice returns
    the original exponent object.
    """
    if isinstance(p, ConstantExponent):
        return ConstantExponent(p.value / (p.value - 1.0))
    if isinstance(p, DerivedExponent) and p.mapping is DerivedMap.CONJUGATE:
        return p.parent
    certificate = None
    if p.certificate is not None:
        factor = propagation_factor(DerivedMap.CONJUGATE, p.bounds)
        p_infinity = p.certificate.p_infinity
        certificate = p.certificate.scaled(factor, p_infinity / (p_infinity - 1.0))
    return DerivedExponent(p, DerivedMap.CONJUGATE, certificate=certificate)


def theta_range(p: VariableExponent) -> float:
    """theta_p = min{1, 2/p_plus, 2 - 2/p_minus}."""
    return min(1.0, 2.0 / p.p_plus, 2.0 - 2.0 / p.p_minus)


def admissible_tau(p: VariableExponent, supplied: Optional[float] = None) -> float:
    """Upper end tau_p of the admissible interpolation parameters.

    Log-Hoelder certified (and constant) exponents have tau_p = theta_p.
    Any other exponent needs a configured value.

    :raises ThetaOutOfRange: no certificate and no configured value, or the
        configured value is outside (0, theta_p]
    """
    theta_max = theta_range(p)
    if supplied is not None:
        if not 0.0 < supplied <= theta_max:
            raise ThetaOutOfRange(f"tau = {supplied} must lie in (0, {theta_max}]")
        return float(supplied)
    if isinstance(p, ConstantExponent) or (p.certificate is not None and p.certificate.certified):
        return theta_max
    raise ThetaOutOfRange(
        "Exponent carries no log-Hoelder certificate; tau must be supplied in config"
    )


def _check_theta(p: VariableExponent, theta: float) -> float:
    theta_max = theta_range(p)
    if not 0.0 < theta < theta_max - THETA_GUARD:
        raise ThetaOutOfRange(
            f"theta = {theta} must satisfy 0 < theta < theta_p = {theta_max}"
        )
    return theta_max


def p_theta(p: VariableExponent, theta: float) -> VariableExponent:
    """p_theta(x) = 2(1-theta)p(x)/(2 - theta p(x)), the exponent with
    1/p = theta/2 + (1-theta)/p_theta. A log-Hoelder certificate of p is
    carried over with constants multiplied by 4(1-theta)/(2-theta p_plus)^2.

    :param p: exponent
    :param theta: interpolation parameter, 0 < theta < theta_range(p)
    :raises ThetaOutOfRange: theta outside the open range
    :return: transformed exponent
    """
    _check_theta(p, theta)
    certificate = None
    if p.certificate is not None:
        factor = propagation_factor(DerivedMap.THETA, p.bounds, theta)
        p_infinity = float(apply_map(DerivedMap.THETA, p.certificate.p_infinity, theta))
        certificate = p.certificate.scaled(factor, p_infinity)
    if isinstance(p, ConstantExponent):
        value = float(apply_map(DerivedMap.THETA, p.value, theta))
        return ConstantExponent(value, certificate=certificate)
    return DerivedExponent(p, DerivedMap.THETA, theta=theta, certificate=certificate)


@dataclass(frozen=True)
class ThetaTransform:
    """One point of the interpolation cloud of an exponent.

    Attributes:
        theta: interpolation parameter
        theta_max: theta_p of the parent
        parent: exponent p
        transformed: exponent p_theta
        tau: admissible bound tau_p, None when neither certified nor supplied
    """
    theta: float
    theta_max: float
    parent: VariableExponent
    transformed: VariableExponent
    tau: Optional[float]

    def identity_defect(self, x) -> float:
        """Largest |1/p - theta/2 - (1-theta)/p_theta| over the points x."""
        x = np.asarray(x, dtype=float)
        defect = (1.0 / self.parent(x) - self.theta / 2.0
                  - (1.0 - self.theta) / self.transformed(x))
        return float(np.max(np.abs(defect)))


def theta_transform(
        p: VariableExponent,
        theta: float,
        tau: Optional[float] = None
    ) -> ThetaTransform:
    theta_max = _check_theta(p, theta)
    try:
        resolved_tau = admissible_tau(p, tau)
    except ThetaOutOfRange:
        resolved_tau = None
    return ThetaTransform(theta, theta_max, p, p_theta(p, theta), resolved_tau)


def theta_cloud(p: VariableExponent, count: int = 8) -> List[ThetaTransform]:
    """Uniform interior sample of the cloud {p_theta : 0 < theta < theta_p}."""
    theta_max = theta_range(p)
    thetas = theta_max * np.arange(1, count + 1) / (count + 1)
    return [theta_transform(p, float(t)) for t in thetas if t < theta_max - THETA_GUARD]


def rp_range(p: float) -> List[Tuple[float, float]]:
    """R_p = {r : |1/r - 1/2| > |1/p - 1/2|} as open intervals.

    For p = 2 the empty list is returned: every p_theta of the constant 2
    equals 2, so the interpolation cloud adds no exponent.
    """
    if not 1.0 < p < math.inf:
        raise InvalidExponent(f"R_p needs 1 < p < inf, got {p}")
    d = abs(1.0 / p - 0.5)
    if d == 0.0:
        return []
    return [(1.0, 1.0 / (0.5 + d)), (1.0 / (0.5 - d), math.inf)]


def in_rp_range(r: float, p: float) -> bool:
    return any(lo < r < hi for lo, hi in rp_range(p))


@dataclass(frozen=True)
class Decomposition:
    """Exponent decomposition 1/p(x) = theta/p0 + (1-theta)/p_theta(x)."""
    p0: float
    theta: float
    p_theta: VariableExponent

    def to_dict(self):
        return {"p0": self.p0, "theta": self.theta, "p_theta": self.p_theta.spec()}


def diening_decomposition(p: VariableExponent, p0: float, theta: float) -> Decomposition:
    """Builds p_theta = (1-theta)/(1/p - theta/p0) for given p0 and theta.

    :raises BadDecomposition: theta outside (0, 1), p0 <= 1, or the resulting
        p_theta leaves (1, inf)
    """
    if not 0.0 < theta < 1.0:
        raise BadDecomposition(f"theta = {theta} must lie in (0, 1)")
    if not p0 > 1.0:
        raise BadDecomposition(f"p0 = {p0} must exceed 1")
    try:
        transformed = DerivedExponent(p, DerivedMap.DIENING, theta=theta, p0=p0)
    except InvalidExponent as e:
        raise BadDecomposition(f"No admissible p_theta for p0={p0}, theta={theta}: {e}") from e
    if transformed.is_constant:
        transformed = ConstantExponent(transformed.p_minus)
    return Decomposition(p0, theta, transformed)


def constant_decomposition(
        p_value: float,
        theta: Optional[float] = None,
        p0: float = 2.0
    ) -> Decomposition:
    """Decomposition of a constant exponent; theta defaults to half of the
    admissible range of the two-exponent transform.
    """
    if theta is None:
        # p_theta > 1 needs 1/p - theta/p0 < 1 - theta
        limit = (1.0 - 1.0 / p_value) / (1.0 - 1.0 / p0)
        limit = min(limit, p0 / p_value, 1.0)
        theta = 0.5 * limit
    return diening_decomposition(ConstantExponent(p_value), p0, theta)


def verify_decomposition(
        p: VariableExponent,
        decomposition: Decomposition,
        nodes
    ) -> float:
    """Checks the decomposition identity on the given nodes.

    :raises BadDecomposition: theta outside (0, 1) or identity defect above 1e-9
    :return: largest identity defect
    """
    if not 0.0 < decomposition.theta < 1.0:
        raise BadDecomposition(f"theta = {decomposition.theta} must lie in (0, 1)")
    if not decomposition.p0 > 1.0:
        raise BadDecomposition(f"p0 = {decomposition.p0} must exceed 1")
    x = np.asarray(nodes, dtype=float)
    defect = np.abs(
        1.0 / p(x)
        - decomposition.theta / decomposition.p0
        - (1.0 - decomposition.theta) / decomposition.p_theta(x)
    )
    worst = float(np.max(defect))
    if not worst <= DECOMPOSITION_TOLERANCE:
        raise BadDecomposition(f"Decomposition identity fails by {worst}")
    return worst
