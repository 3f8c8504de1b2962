import math

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import NotEnclosable, SpecParseError
from vlex_multipliers.pipelines.probes import ProbeLayout, SupMeasurement, measure_sup
from vlex_multipliers.symbols.Symbol import MultiplierSymbol, Symbol
from vlex_multipliers.symbols.enclosure import tail_sup
from vlex_multipliers.utils import get_logger


class BoundFormula(Enum):
    CLOUD = "cloud"
    VARIATION = "variation"
    QUANTIZATION = "quantization"


class CertificateKeys():
    TARGET_ID = "target_id"
    TARGET = "target"
    MODE = "mode"
    EPSILON = "epsilon"
    THETA = "theta"
    FORMULA = "bound_formula_id"
    CONSTANTS = "constants"
    STAGE_1 = "stage_1"
    STAGE_2 = "stage_2"
    TOTAL = "certified_total"
    APPROXIMANT = "approximant"
    LAYOUT = "layout"
    RADIUS = "radius"
    METADATA = "metadata"


CONSTANT_C_THETA = "c_theta"
CONSTANT_S_THETA = "s_theta"
CONSTANT_A_THETA = "a_theta"
CONSTANT_C_Q = "c_q"
CONSTANT_S_Q = "s_q"
CONSTANT_ETA = "eta"
CONSTANT_P0 = "p0"
CONSTANT_Q = "q"
CONSTANT_VNORM = "vnorm"


def _power(base: float, exponent: float) -> float:
    if base == 0.0:
        return 0.0 if exponent > 0 else 1.0
    return math.pow(base, exponent)


def interpolation_eta(p0: float, q: float) -> float:
    """eta with 1/p0 = eta/2 + (1-eta)/q, i.e. (2 p0 - 2 q)/(2 p0 - p0 q)."""
    denominator = 2.0 * p0 - p0 * q
    if denominator == 0.0:
        return math.nan
    return (2.0 * p0 - 2.0 * q) / denominator


def cloud_bounds(constants: Dict[str, float], theta: float, sup1: float, sup2: float) -> Tuple[float, float]:
    """4 (1+c)^(1-theta) A^(1-theta) sup1^theta and
    2^(3-theta) c^(1-theta) A^(1-theta) sup2^theta.
    """
    c = constants[CONSTANT_C_THETA]
    a = constants[CONSTANT_A_THETA]
    common = _power(a, 1.0 - theta)
    first = 4.0 * _power(1.0 + c, 1.0 - theta) * common * _power(sup1, theta)
    second = _power(2.0, 3.0 - theta) * _power(c, 1.0 - theta) * common * _power(sup2, theta)
    return first, second


def variation_bounds(constants: Dict[str, float], theta: float, sup1: float, sup2: float) -> Tuple[float, float]:
    c, cq = constants[CONSTANT_C_THETA], constants[CONSTANT_C_Q]
    eta, v = constants[CONSTANT_ETA], constants[CONSTANT_VNORM]
    outer = (1.0 - eta) * theta
    v_factor = _power(v, outer + 1.0 - theta)
    first = (4.0 * _power((1.0 + c) * c, 1.0 - theta) * _power((1.0 + cq) * cq, outer)
             * v_factor * _power(sup1, eta * theta))
    second = (_power(2.0, 2.0 + outer + 1.0 - theta) * _power(cq, 2.0 * outer)
              * _power(c, 2.0 * (1.0 - theta)) * v_factor * _power(sup2, eta * theta))
    return first, second


def quantization_bound(constants: Dict[str, float], theta: float, error: float) -> float:
    c, cq = constants[CONSTANT_C_THETA], constants[CONSTANT_C_Q]
    eta, v = constants[CONSTANT_ETA], constants[CONSTANT_VNORM]
    outer = (1.0 - eta) * theta
    return (4.0 * _power(cq, outer) * _power(c, 1.0 - theta)
            * _power(v, outer + 1.0 - theta) * _power(error, eta * theta))


@dataclass(frozen=True)
class CertificateStage:
    """One search stage of a certificate.

    Attributes:
        parameter_name: ``n0``, ``delta0`` or ``h_q``
        parameter: value found by the search
        sup: measured sup norm of the stage error
        bound: bound term evaluated at ``sup.bound``
    """
    parameter_name: str
    parameter: float
    sup: SupMeasurement
    bound: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "parameter_name": self.parameter_name,
            "parameter": self.parameter,
            "sup": self.sup.to_dict(),
            "bound": self.bound,
        }

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "CertificateStage":
        return cls(
            str(raw["parameter_name"]),
            float(raw["parameter"]),
            SupMeasurement.from_dict(raw["sup"]),
            float(raw["bound"])
        )


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    recomputed_total: float
    issues: List[str]

    def to_dict(self) -> Dict[str, Any]:
        return {"ok": self.ok, "recomputed_total": self.recomputed_total, "issues": self.issues}


@dataclass(frozen=True)
class HonestyResult:
    ok: bool
    measured: float
    allowed: float
    nodes: int

    def to_dict(self) -> Dict[str, Any]:
        return {"ok": self.ok, "measured": self.measured, "allowed": self.allowed, "nodes": self.nodes}


@dataclass(frozen=True)
class ApproximationCertificate:
    """Certified approximation ||a - approximant||_{M_p(.)} <= certified_total < epsilon.

    Attributes:
        target_id: name of the approximated symbol
        target: spec of the approximated symbol, used by the honesty check
        mode: pipeline that produced the certificate (a, b, dot, bar, jumps, quantization)
        epsilon: requested accuracy
        theta: interpolation parameter of the bound formula
        formula: bound formula the stage bounds come from
        constants: every constant entering the formula
        stage_1: cutoff stage (or the quantization stage)
        stage_2: mollification stage, None for quantization
        certified_total: sum of the stage bounds
        approximant: the approximating symbol
        layout: probe layout of the sup measurements
        radius: probe radius of the stage-1 measurement
        metadata: provenance of the constants, offsets and exponents
    """
    target_id: str
    target: Optional[Dict[str, Any]]
    mode: str
    epsilon: float
    theta: float
    formula: BoundFormula
    constants: Dict[str, float]
    stage_1: CertificateStage
    stage_2: Optional[CertificateStage]
    certified_total: float
    approximant: MultiplierSymbol
    layout: ProbeLayout
    radius: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    # -- arithmetic -----------------------------------------------------------

    def recompute(self) -> Tuple[float, Optional[float]]:
        """Stage bounds re-evaluated from the stored constants and sups."""
        if self.formula is BoundFormula.QUANTIZATION:
            return quantization_bound(self.constants, self.theta, self.stage_1.sup.bound), None
        sup2 = self.stage_2.sup.bound if self.stage_2 is not None else 0.0
        if self.formula is BoundFormula.CLOUD:
            return cloud_bounds(self.constants, self.theta, self.stage_1.sup.bound, sup2)
        return variation_bounds(self.constants, self.theta, self.stage_1.sup.bound, sup2)

    def _constant_issues(self) -> List[str]:
        issues = []
        c = self.constants
        if CONSTANT_S_THETA in c and not math.isclose(c[CONSTANT_C_THETA], 3.0 * c[CONSTANT_S_THETA], rel_tol=1e-15):
            issues.append(f"c_theta = {c[CONSTANT_C_THETA]} is not 3 s_theta = {3.0 * c[CONSTANT_S_THETA]}")
        if self.formula is not BoundFormula.CLOUD:
            if CONSTANT_S_Q in c and not math.isclose(c[CONSTANT_C_Q], 3.0 * c[CONSTANT_S_Q], rel_tol=1e-15):
                issues.append(f"c_q = {c[CONSTANT_C_Q]} is not 3 s_q = {3.0 * c[CONSTANT_S_Q]}")
            eta = interpolation_eta(c[CONSTANT_P0], c[CONSTANT_Q])
            if not math.isclose(c[CONSTANT_ETA], eta, rel_tol=1e-15):
                issues.append(f"eta = {c[CONSTANT_ETA]} does not match p0, q (expected {eta})")
        return issues

    def replay(self, tolerance: Optional[float] = None) -> ReplayResult:
        """Pure arithmetic check of the stored certificate.

        :param tolerance: relative tolerance, defaults to the configured
            replay tolerance
        """
        if tolerance is None:
            tolerance = get_defaults().replay_tolerance
        issues = self._constant_issues()
        first, second = self.recompute()
        scale = max(1.0, abs(self.certified_total))

        if abs(first - self.stage_1.bound) > tolerance * max(1.0, abs(first)):
            issues.append(f"stage 1 bound {self.stage_1.bound} does not match recomputed {first}")
        if self.stage_2 is not None and abs(second - self.stage_2.bound) > tolerance * max(1.0, abs(second)):
            issues.append(f"stage 2 bound {self.stage_2.bound} does not match recomputed {second}")

        total = first + (second or 0.0)
        if abs(total - self.certified_total) > tolerance * scale:
            issues.append(f"certified total {self.certified_total} does not match recomputed {total}")
        if self.formula is BoundFormula.QUANTIZATION:
            if not first < self.epsilon:
                issues.append(f"quantization bound {first} is not below epsilon {self.epsilon}")
        else:
            if not first < self.epsilon / 2.0 or not (second or 0.0) < self.epsilon / 2.0:
                issues.append(f"stage bounds {first}, {second} are not both below epsilon/2")
        if not self.certified_total < self.epsilon and self.epsilon > 0:
            issues.append(f"certified total {self.certified_total} is not below epsilon {self.epsilon}")

        get_logger(__name__).debug(
            f"Replay of {self.target_id!r} ({self.formula.value}): total {total:.17g}, {len(issues)} issue(s)"
        )
        return ReplayResult(not issues, total, issues)

    def _beyond_radius(self, target: MultiplierSymbol) -> Optional[float]:
        """Largest sampled |target - approximant| over |x| >= radius, where the
        mollified part of the approximant vanishes."""
        from vlex_multipliers.symbols.MollifiedSymbol import MollifiedSymbol
        if not isinstance(target, Symbol):
            return None
        if isinstance(self.approximant, MollifiedSymbol):
            difference = target if self.approximant.offset is None else target - self.approximant.offset
        elif isinstance(self.approximant, Symbol):
            difference = target - self.approximant
        else:
            return None
        try:
            return tail_sup(difference, self.radius).value
        except NotEnclosable as e:
            get_logger(__name__).warning(f"Honesty check of {self.target_id!r} skips |x| >= {self.radius}: {e}")
            return None

    def honesty_check(
            self,
            target: Optional[MultiplierSymbol] = None,
            factor: int = 4,
            tolerance: Optional[float] = None
        ) -> HonestyResult:
        """Measures ||target - approximant||_inf on a refined layout and
        compares it with the sup bounds used in the certificate.
        """
        if tolerance is None:
            tolerance = get_defaults().replay_tolerance
        if target is None:
            if self.target is None:
                raise ValueError(f"Certificate for {self.target_id!r} carries no target spec")
            target = MultiplierSymbol.from_spec(self.target)
        layout = self.layout.refined(factor)
        breakpoints = sorted(set(target.breakpoints.tolist()) | set(self.approximant.breakpoints.tolist()))
        widths = [1.0]
        if self.stage_2 is not None:
            widths.append(2.0 * self.stage_2.parameter)
        nodes = layout.nodes(self.radius, breakpoints, widths)
        measured = measure_sup(lambda x: target.evaluate(x) - self.approximant.evaluate(x), nodes)
        value = measured.value
        beyond = self._beyond_radius(target)
        if beyond is not None:
            value = max(value, beyond)
        allowed = self.stage_1.sup.bound + (self.stage_2.sup.bound if self.stage_2 is not None else 0.0)
        ok = value <= allowed + tolerance * max(1.0, allowed)
        get_logger(__name__).debug(
            f"Honesty check of {self.target_id!r}: measured {value:.6g}, allowed {allowed:.6g}"
        )
        return HonestyResult(ok, value, allowed, measured.nodes)

    def with_offset(self, offset_symbol, mode: str, target: MultiplierSymbol, extra: Dict[str, Any]):
        """Same bounds for target = offset + rest when the rest was certified."""
        from vlex_multipliers.symbols.MollifiedSymbol import MollifiedSymbol
        approximant = self.approximant
        if isinstance(approximant, MollifiedSymbol):
            approximant = MollifiedSymbol(approximant.base, approximant.delta, offset=offset_symbol)
        else:
            approximant = approximant + offset_symbol
        metadata = dict(self.metadata)
        metadata.update(extra)
        metadata["rest_id"] = self.target_id
        return replace(
            self,
            target_id=target.name,
            target=target.spec(),
            mode=mode,
            approximant=approximant,
            metadata=metadata
        )

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        return {
            CertificateKeys.TARGET_ID: self.target_id,
            CertificateKeys.TARGET: self.target,
            CertificateKeys.MODE: self.mode,
            CertificateKeys.EPSILON: self.epsilon,
            CertificateKeys.THETA: self.theta,
            CertificateKeys.FORMULA: self.formula.value,
            CertificateKeys.CONSTANTS: dict(self.constants),
            CertificateKeys.STAGE_1: self.stage_1.to_dict(),
            CertificateKeys.STAGE_2: None if self.stage_2 is None else self.stage_2.to_dict(),
            CertificateKeys.TOTAL: self.certified_total,
            CertificateKeys.APPROXIMANT: self.approximant.spec(),
            CertificateKeys.LAYOUT: self.layout.to_dict(),
            CertificateKeys.RADIUS: self.radius,
            CertificateKeys.METADATA: self.metadata,
        }

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "ApproximationCertificate":
        """Reads a certificate written by ``to_dict``.

        :raises SpecParseError: on missing members or malformed values
        """
        try:
            stage_2 = raw[CertificateKeys.STAGE_2]
            return cls(
                target_id=str(raw[CertificateKeys.TARGET_ID]),
                target=raw.get(CertificateKeys.TARGET),
                mode=str(raw[CertificateKeys.MODE]),
                epsilon=float(raw[CertificateKeys.EPSILON]),
                theta=float(raw[CertificateKeys.THETA]),
                formula=BoundFormula(raw[CertificateKeys.FORMULA]),
                constants={k: float(v) for k, v in raw[CertificateKeys.CONSTANTS].items()},
                stage_1=CertificateStage.from_dict(raw[CertificateKeys.STAGE_1]),
                stage_2=None if stage_2 is None else CertificateStage.from_dict(stage_2),
                certified_total=float(raw[CertificateKeys.TOTAL]),
                approximant=MultiplierSymbol.from_spec(raw[CertificateKeys.APPROXIMANT]),
                layout=ProbeLayout.from_dict(raw[CertificateKeys.LAYOUT]),
                radius=float(raw[CertificateKeys.RADIUS]),
                metadata=dict(raw.get(CertificateKeys.METADATA, {}))
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise SpecParseError(f"Malformed certificate: {e}") from e
