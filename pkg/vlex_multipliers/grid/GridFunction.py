import csv
import math

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from vlex_multipliers.errors import NonFinite, SpecParseError

CSV_HEADER = ("t", "re", "im")
DECAY_THRESHOLD = 1e-8
MIN_COUNT = 8


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid t_j = -L + j*h, j = 0..N-1, with h = 2L/N.

    Attributes:
        half_width: L
        count: N, a power of two not smaller than 8
    """
    half_width: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise SpecParseError(f"Grid half width must be positive, got {self.half_width}")
        if not (isinstance(self.count, (int, np.integer)) and _is_power_of_two(int(self.count))
                and self.count >= MIN_COUNT):
            raise SpecParseError(f"Grid count must be a power of two >= {MIN_COUNT}, got {self.count}")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / self.count

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_width + np.arange(self.count) * self.step

    def dual(self) -> "Grid":
        """Frequency grid x_k = -pi/h + k*2pi/(N h) of the discrete transform."""
        return Grid(math.pi / self.step, self.count)

    def refined(self, factor: int = 4) -> "Grid":
        return Grid(self.half_width, self.count * factor)

    def to_dict(self):
        return {"half_width": self.half_width, "count": int(self.count)}


class GridFunction:
    """Complex samples f_j = f(t_j) of a function on a ``Grid``. The sample
    array is read-only.

    Attributes:
        grid: sampling grid
        samples: complex array of length ``grid.count``
    """

    def __init__(self, grid: Grid, samples):
        samples = np.array(samples, dtype=complex)
        if samples.shape != (grid.count,):
            raise ValueError(
                f"Expected {grid.count} samples, got array of shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise NonFinite("Grid function samples contain NaN or infinite values")
        samples.setflags(write=False)
        self.grid = grid
        self.samples = samples

    @classmethod
    def from_callable(cls, grid: Grid, function: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        with np.errstate(all="ignore"):
            values = function(grid.nodes)
        return cls(grid, np.broadcast_to(np.asarray(values, dtype=complex), (grid.count,)))

    @classmethod
    def indicator(cls, grid: Grid, a: float, b: float, height: complex = 1.0) -> "GridFunction":
        """Samples of height*chi_[a,b]. Nodes that coincide with an end point
        carry half the height, which keeps trapezoid sums second order.
        """
        t = grid.nodes
        tolerance = 1e-9 * grid.step
        values = np.where((t > a) & (t < b), 1.0, 0.0)
        values[np.abs(t - a) <= tolerance] = 0.5
        values[np.abs(t - b) <= tolerance] = 0.5
        return cls(grid, height * values)

    @classmethod
    def gaussian(
            cls,
            grid: Grid,
            center: float = 0.0,
            width: float = 1.0,
            frequency: float = 0.0,
            amplitude: complex = 1.0
        ) -> "GridFunction":
        t = grid.nodes
        values = amplitude * np.exp(-(t - center) ** 2 / (2.0 * width ** 2)) * np.exp(-1j * frequency * t)
        return cls(grid, values)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.count, dtype=complex))

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.samples)

    @property
    def sup(self) -> float:
        return float(np.max(self.magnitude))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.samples)

    @property
    def decays(self) -> bool:
        """True if the boundary samples are negligible against the maximum."""
        peak = self.sup
        boundary = max(abs(self.samples[0]), abs(self.samples[-1]))
        return boundary <= DECAY_THRESHOLD * peak

    def _check_grid(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise ValueError(f"Grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_grid(other)
        return GridFunction(self.grid, self.samples + other.samples)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_grid(other)
        return GridFunction(self.grid, self.samples - other.samples)

    def __mul__(self, other: Union[complex, float, "GridFunction"]) -> "GridFunction":
        if isinstance(other, GridFunction):
            self._check_grid(other)
            return GridFunction(self.grid, self.samples * other.samples)
        return GridFunction(self.grid, complex(other) * self.samples)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.samples)

    def __repr__(self) -> str:
        return f"GridFunction(grid={self.grid}, sup={self.sup:.6g})"


def read_csv(path: str, grid: Optional[Grid] = None) -> GridFunction:
    """Reads a grid function from a CSV file with header ``t,re,im``.

    :param path: CSV file
    :param grid: expected grid; inferred from the t column when omitted
    :raises SpecParseError: on an empty file, a wrong header, malformed rows
        or nodes that do not form a valid grid
    :return: grid function
    """
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    rows = [row for row in rows if row]
    if not rows:
        raise SpecParseError(f"Function file '{path}' is empty")
    header = tuple(column.strip() for column in rows[0])
    if header != CSV_HEADER:
        raise SpecParseError(f"Function file '{path}' needs header {','.join(CSV_HEADER)}, got {header}")
    try:
        table = np.array([[float(value) for value in row] for row in rows[1:]], dtype=float)
    except ValueError as e:
        raise SpecParseError(f"Malformed row in function file '{path}': {e}") from e
    if table.size == 0:
        raise SpecParseError(f"Function file '{path}' has no samples")
    if table.ndim != 2 or table.shape[1] != 3:
        raise SpecParseError(f"Function file '{path}' needs exactly three columns")

    t = table[:, 0]
    if grid is None:
        grid = Grid(-float(t[0]), len(t))
    if len(t) != grid.count or not np.allclose(t, grid.nodes, rtol=0.0, atol=1e-9 * grid.half_width):
        raise SpecParseError(f"Nodes in '{path}' do not match a uniform symmetric grid")
    return GridFunction(grid, table[:, 1] + 1j * table[:, 2])


def write_csv(path: str, function: GridFunction):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for t, value in zip(function.nodes, function.samples):
            writer.writerow([repr(float(t)), repr(float(value.real)), repr(float(value.imag))])
