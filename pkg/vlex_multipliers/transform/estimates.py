"""Two-sided estimates of multiplier norms on L^p(.)."""
import math

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from vlex_multipliers.errors import (
    InconsistentEstimate,
    NoUpperBoundAvailable,
    NotInWienerForm,
    UnboundedVariation
)
from vlex_multipliers.exponent.VariableExponent import ConstantExponent, VariableExponent
from vlex_multipliers.symbols.Symbol import MultiplierSymbol
from vlex_multipliers.symbols.norms import sup_norm, symbol_wiener_norm, vnorm
from vlex_multipliers.transform.WitnessSearch import SearchConfig, Witness, opnorm_lower
from vlex_multipliers.transform.fourier import apply_multiplier, sample_symbol
from vlex_multipliers.utils import get_logger

ESTIMATE_SLACK = 1e-9


class UpperProvenance(Enum):
    STECHKIN = "stechkin"
    WIENER = "wiener"
    SUP_NORM_TRIVIAL = "sup-norm-trivial"
    CONFIG_SUPPLIED = "config-supplied"


class SBoundSource(Enum):
    """Where the bound for the norm of S came from."""
    SUPPLIED = "config-supplied"
    CLASSICAL = "classical-cot"
    ABSENT = "absent"


@dataclass(frozen=True)
class NormEstimate:
    """Bracket lower <= ||a||_M <= upper of a multiplier norm.

    Attributes:
        lower: witness ratio
        lower_witness: trial function attaining ``lower``
        upper: smallest applicable upper bound
        upper_provenance: rule that produced ``upper``
        metadata: grid, exponent, budget, the bound for S with its source,
            and the sup norm target
    """
    lower: float
    lower_witness: Optional[Witness]
    upper: float
    upper_provenance: UpperProvenance
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper * (1.0 + ESTIMATE_SLACK):
            raise InconsistentEstimate(
                f"Lower bound {self.lower} exceeds upper bound {self.upper} ({self.upper_provenance.value})"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lower": self.lower,
            "lower_witness": None if self.lower_witness is None else self.lower_witness.to_dict(),
            "upper": self.upper,
            "upper_provenance": self.upper_provenance.value,
            "metadata": self.metadata,
        }


def default_s_bound(r: float) -> float:
    """||S||_{L^r} = cot(pi / (2 max(r, r'))) for constant 1 < r < inf."""
    r_conjugate = r / (r - 1.0)
    return 1.0 / math.tan(math.pi / (2.0 * max(r, r_conjugate)))


def resolve_s_bound(p: VariableExponent, s_bound: Optional[float]) -> Optional[float]:
    """The supplied bound, or the classical constant for constant exponents.
    Variable exponents have no default.
    """
    if s_bound is not None:
        if s_bound < 1.0:
            raise ValueError(f"A bound for the norm of S is at least 1, got {s_bound}")
        return float(s_bound)
    if isinstance(p, ConstantExponent) or p.is_constant:
        return default_s_bound(p.p_minus)
    return None


def s_bound_source(p: VariableExponent, s_bound: Optional[float]) -> SBoundSource:
    if s_bound is not None:
        return SBoundSource.SUPPLIED
    if isinstance(p, ConstantExponent) or p.is_constant:
        return SBoundSource.CLASSICAL
    return SBoundSource.ABSENT


def stechkin_bound(symbol: MultiplierSymbol, s_bound: float) -> float:
    """s_bound * ||a||_V.

    :raises UnboundedVariation: a has infinite variation
    """
    return s_bound * vnorm(symbol)


def _is_two(p: VariableExponent) -> bool:
    return (isinstance(p, ConstantExponent) or p.is_constant) and p.p_minus == 2.0


def upper_candidates(
        a: MultiplierSymbol,
        p: VariableExponent,
        s_bound: Optional[float] = None,
        config_upper: Optional[float] = None
    ) -> List[Tuple[float, UpperProvenance]]:
    candidates = []
    s = resolve_s_bound(p, s_bound)
    if s is not None:
        try:
            candidates.append((stechkin_bound(a, s), UpperProvenance.STECHKIN))
        except UnboundedVariation:
            pass
    try:
        candidates.append((symbol_wiener_norm(a), UpperProvenance.WIENER))
    except NotInWienerForm:
        pass
    if _is_two(p):
        candidates.append((sup_norm(a), UpperProvenance.SUP_NORM_TRIVIAL))
    if config_upper is not None:
        candidates.append((float(config_upper), UpperProvenance.CONFIG_SUPPLIED))
    return candidates


def peak_frequency(a: MultiplierSymbol, search: SearchConfig) -> float:
    """Dual grid node where |a| is largest."""
    nodes = search.grid.dual().nodes
    return float(nodes[int(np.argmax(np.abs(sample_symbol(a, nodes))))])


def multiplier_norm_bounds(
        a: MultiplierSymbol,
        p: VariableExponent,
        s_bound: Optional[float] = None,
        search: Optional[SearchConfig] = None,
        config_upper: Optional[float] = None
    ) -> NormEstimate:
    """Brackets ||a||_{M_p(.)}.

    The upper bound is the smallest of s_bound ||a||_V, ||a||_W, ||a||_inf
    (for p = 2 only) and a configured value. The lower bound is a witness
    search for W^0(a); ||a||_inf is recorded as the embedding target.

    :param a: symbol
    :param p: exponent
    :param s_bound: bound for the norm of S on L^p(.); defaults to the
        classical constant for constant exponents
    :param search: witness search budget
    :param config_upper: externally known upper bound
    :raises NoUpperBoundAvailable: no rule applies
    :raises InconsistentEstimate: the witness exceeds the upper bound
    :return: norm estimate
    """
    if search is None:
        search = SearchConfig.from_defaults()
    candidates = upper_candidates(a, p, s_bound, config_upper)
    if not candidates:
        raise NoUpperBoundAvailable(
            f"Symbol {a.name!r} has no finite variation bound, no Wiener form, and p is not 2"
        )
    upper, provenance = min(candidates, key=lambda item: item[0])

    lower = opnorm_lower(
        lambda f: apply_multiplier(a, f),
        p,
        search,
        hint_frequency=peak_frequency(a, search)
    )
    target = sup_norm(a)
    get_logger(__name__).debug(
        f"Multiplier {a.name!r}: lower {lower.value:.9g}, upper {upper:.9g} ({provenance.value}), "
        f"embedding target {target:.9g}"
    )
    return NormEstimate(
        lower=lower.value,
        lower_witness=lower.witness,
        upper=upper,
        upper_provenance=provenance,
        metadata={
            "grid": search.grid.to_dict(),
            "p": p.spec(),
            "search": search.to_dict(),
            "s_bound": resolve_s_bound(p, s_bound),
            "s_bound_source": s_bound_source(p, s_bound).value,
            "embedding_target": target,
            "lower_start": lower.start,
            "evaluations": lower.evaluations,
            "candidates": {prov.value: value for value, prov in candidates},
        }
    )
