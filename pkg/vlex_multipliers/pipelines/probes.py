"""Probe nodes and sup-norm measurements used inside certificates."""
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional

import numpy as np

from vlex_multipliers.defaults import get_defaults

BREAKPOINT_WINDOW = 1.0


@dataclass(frozen=True)
class SupMeasurement:
    """Sampled sup norm with a bound used in certificate arithmetic.

    ``measure_sup`` allows the function to exceed its larger end value on a
    probe interval by at most 2 * gap * (local slope), where the local slope
    is the largest difference quotient of the interval and its two
    neighbours. The certificate stages replace that margin by interval
    enclosures of the symbol (``enclosed``).

    Attributes:
        value: largest sampled modulus
        margin: bound - value
        bound: value used in certificate arithmetic
        nodes: number of probe nodes
    """
    value: float
    margin: float
    bound: float
    nodes: int

    def to_dict(self) -> Dict[str, float]:
        return {"value": self.value, "margin": self.margin, "bound": self.bound, "nodes": self.nodes}

    @classmethod
    def from_dict(cls, raw: Dict[str, float]) -> "SupMeasurement":
        return cls(float(raw["value"]), float(raw["margin"]), float(raw["bound"]), int(raw["nodes"]))

    @classmethod
    def enclosed(cls, value: float, bound: float, nodes: int) -> "SupMeasurement":
        bound = max(float(bound), float(value))
        return cls(float(value), bound - float(value), bound, int(nodes))

    @classmethod
    def exact(cls, value: float) -> "SupMeasurement":
        return cls(float(value), 0.0, float(value), 0)


@dataclass(frozen=True)
class ProbeLayout:
    """Core grid on [-C, C], doubling annuli up to a radius and windows
    around breakpoints.

    Attributes:
        core_half_width: C
        core_count: nodes on the core
        annulus_count: nodes per annulus +-[C 2^k, C 2^(k+1)]
        breakpoint_count: nodes per breakpoint window
    """
    core_half_width: float
    core_count: int
    annulus_count: int
    breakpoint_count: int

    @classmethod
    def from_defaults(cls) -> "ProbeLayout":
        defaults = get_defaults()
        return cls(
            defaults.core_half_width,
            defaults.core_count,
            defaults.annulus_count,
            defaults.breakpoint_count
        )

    def refined(self, factor: int = 4) -> "ProbeLayout":
        return ProbeLayout(
            self.core_half_width,
            self.core_count * factor,
            self.annulus_count * factor,
            self.breakpoint_count * factor
        )

    def nodes(
            self,
            radius: float,
            breakpoints: Iterable[float] = (),
            widths: Iterable[float] = (BREAKPOINT_WINDOW,)
        ) -> np.ndarray:
        """Sorted probe nodes covering [-radius, radius]."""
        parts = [np.linspace(-self.core_half_width, self.core_half_width, self.core_count)]
        inner = self.core_half_width
        while inner < radius:
            outer = 2.0 * inner
            ring = np.linspace(inner, outer, self.annulus_count)
            parts.extend([ring, -ring])
            inner = outer
        window = np.linspace(-1.0, 1.0, self.breakpoint_count)
        for point in breakpoints:
            for width in widths:
                parts.append(point + width * window)
        nodes = np.unique(np.concatenate(parts))
        return nodes[np.isfinite(nodes)]

    def to_dict(self) -> Dict[str, float]:
        return {
            "core_half_width": self.core_half_width,
            "core_count": self.core_count,
            "annulus_count": self.annulus_count,
            "breakpoint_count": self.breakpoint_count,
        }

    @classmethod
    def from_dict(cls, raw: Dict[str, float]) -> "ProbeLayout":
        return cls(
            float(raw["core_half_width"]),
            int(raw["core_count"]),
            int(raw["annulus_count"]),
            int(raw["breakpoint_count"])
        )


def measure_sup(
        function: Callable[[np.ndarray], np.ndarray],
        nodes: np.ndarray,
        tail: Optional[float] = None
    ) -> SupMeasurement:
    """Measures sup |function| on sorted nodes.

    :param function: vectorized function
    :param nodes: sorted probe nodes
    :param tail: known sup of |function| outside the nodes (e.g. 0 for a
        compactly supported difference, |limit| otherwise)
    """
    samples = np.asarray(function(nodes), dtype=complex)
    values = np.abs(samples)
    if not np.all(np.isfinite(values)):
        raise ValueError("Function is not finite on the probe nodes")
    value = float(np.max(values)) if len(values) else 0.0
    if len(nodes) < 2:
        return SupMeasurement(value, 0.0, value, len(nodes))

    gaps = np.diff(nodes)
    slopes = np.abs(np.diff(samples)) / gaps
    padded = np.concatenate([[slopes[0]], slopes, [slopes[-1]]])
    local = np.maximum(np.maximum(padded[:-2], padded[1:-1]), padded[2:])
    ends = np.maximum(values[:-1], values[1:])
    bound = max(value, float(np.max(ends + 2.0 * gaps * local)))
    if tail is not None:
        bound = max(bound, float(tail))
        value = max(value, float(tail))
    return SupMeasurement(value, bound - value, bound, len(nodes))


def cutoff_radius(n: int) -> float:
    """Probe radius of the stage that measures a - a psi_n."""
    return 1024.0 * (n + 1)
