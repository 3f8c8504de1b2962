import math

from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from gymnasium.spaces import Box

from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import BudgetZero, ConfigError
from vlex_multipliers.exponent.VariableExponent import VariableExponent
from vlex_multipliers.grid.GridFunction import Grid, GridFunction
from vlex_multipliers.grid.norms import luxemburg_norm
from vlex_multipliers.utils import get_logger, run_parallel

Operator = Callable[[GridFunction], GridFunction]

PARAMS_PER_GAUSSIAN = 4
MIN_STEP_FRACTION = 1e-6
FREQUENCY_REACH = 7.0 / 8.0


class SearchKeys():
    SEED = "seed"
    STARTS = "starts"
    ITERS = "iters"
    FAMILY = "family"
    GAUSSIANS = "gaussians"
    GRID = "grid"
    HALF_WIDTH = "half_width"
    COUNT = "count"


@dataclass(frozen=True)
class SearchConfig:
    """Budget and trial family of a witness search.

    Attributes:
        seed: base seed; start i draws from seed + i
        starts: number of independent starts
        iters: coordinate descent sweeps per start
        gaussians: K, number of modulated Gaussians per trial function
        half_width: half width of the evaluation grid
        count: node count of the evaluation grid
    """
    seed: int
    starts: int
    iters: int
    gaussians: int = 1
    half_width: float = 128.0
    count: int = 4096

    @property
    def grid(self) -> Grid:
        return Grid(self.half_width, self.count)

    @classmethod
    def from_defaults(cls, **overrides) -> "SearchConfig":
        defaults = get_defaults()
        values = dict(
            seed=defaults.search_seed,
            starts=defaults.search_starts,
            iters=defaults.search_iters,
            gaussians=defaults.search_gaussians,
            half_width=defaults.search_half_width,
            count=defaults.search_count
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def from_dict(cls, raw: Dict[str, Any], base: Optional["SearchConfig"] = None) -> "SearchConfig":
        """Reads ``{seed, starts, iters, family: {gaussians}, grid: {half_width, count}}``;
        missing keys come from ``base`` or the INI defaults.

        :raises ConfigError: on unknown keys or values of the wrong type
        """
        if base is None:
            base = cls.from_defaults()
        allowed = {SearchKeys.SEED, SearchKeys.STARTS, SearchKeys.ITERS, SearchKeys.FAMILY, SearchKeys.GRID}
        unknown = set(raw) - allowed
        if unknown:
            raise ConfigError(f"Unknown keys in search config: {sorted(unknown)}")
        family = raw.get(SearchKeys.FAMILY, {})
        grid = raw.get(SearchKeys.GRID, {})
        if set(family) - {SearchKeys.GAUSSIANS}:
            raise ConfigError(f"Unknown keys in search family: {sorted(set(family) - {SearchKeys.GAUSSIANS})}")
        if set(grid) - {SearchKeys.HALF_WIDTH, SearchKeys.COUNT}:
            raise ConfigError(f"Unknown keys in search grid: {sorted(grid)}")
        try:
            return cls(
                seed=int(raw.get(SearchKeys.SEED, base.seed)),
                starts=int(raw.get(SearchKeys.STARTS, base.starts)),
                iters=int(raw.get(SearchKeys.ITERS, base.iters)),
                gaussians=int(family.get(SearchKeys.GAUSSIANS, base.gaussians)),
                half_width=float(grid.get(SearchKeys.HALF_WIDTH, base.half_width)),
                count=int(grid.get(SearchKeys.COUNT, base.count))
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Malformed search config: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return {
            SearchKeys.SEED: self.seed,
            SearchKeys.STARTS: self.starts,
            SearchKeys.ITERS: self.iters,
            SearchKeys.FAMILY: {SearchKeys.GAUSSIANS: self.gaussians},
            SearchKeys.GRID: {SearchKeys.HALF_WIDTH: self.half_width, SearchKeys.COUNT: self.count},
        }


@dataclass(frozen=True)
class Witness:
    """Trial function sum_k A_k exp(-(t - c_k)^2 / (2 w_k^2)) e^{-i omega_k t}."""
    centers: Tuple[float, ...]
    widths: Tuple[float, ...]
    frequencies: Tuple[float, ...]
    amplitudes: Tuple[float, ...]

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "Witness":
        params = np.asarray(vector, dtype=float).reshape(-1, PARAMS_PER_GAUSSIAN)
        return cls(
            tuple(float(v) for v in params[:, 0]),
            tuple(float(math.exp(v)) for v in params[:, 1]),
            tuple(float(v) for v in params[:, 2]),
            tuple(float(v) for v in params[:, 3]),
        )

    def sample(self, grid: Grid) -> GridFunction:
        t = grid.nodes
        values = np.zeros(grid.count, dtype=complex)
        for c, w, omega, amplitude in zip(self.centers, self.widths, self.frequencies, self.amplitudes):
            values += amplitude * np.exp(-(t - c) ** 2 / (2.0 * w ** 2)) * np.exp(-1j * omega * t)
        return GridFunction(grid, values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gaussians": [
                {"center": c, "width": w, "frequency": omega, "amplitude": amplitude}
                for c, w, omega, amplitude in zip(self.centers, self.widths, self.frequencies, self.amplitudes)
            ]
        }


@dataclass(frozen=True)
class LowerBound:
    """Best ratio ||A f|| / ||f|| found by a witness search.

    Attributes:
        value: the ratio, a valid lower bound of the discrete operator norm
        witness: trial function attaining it
        start: index of the start that found it
        evaluations: total number of ratio evaluations over all starts
    """
    value: float
    witness: Optional[Witness]
    start: int
    evaluations: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "start": self.start,
            "evaluations": self.evaluations,
        }


def parameter_space(config: SearchConfig, seed: int) -> Box:
    """Box of (c, log w, omega, A) per Gaussian. Widths stay below L/16 and
    centers inside [-L/2, L/2], so every trial function decays on the grid.
    """
    grid = config.grid
    reach = FREQUENCY_REACH * math.pi / grid.step
    low = np.tile([-grid.half_width / 2.0, math.log(4.0 * grid.step), -reach, -1.0], config.gaussians)
    high = np.tile([grid.half_width / 2.0, math.log(grid.half_width / 16.0), reach, 1.0], config.gaussians)
    if np.any(low > high):
        raise ConfigError(
            f"Search grid with half_width {grid.half_width} and {grid.count} nodes is too coarse "
            f"for Gaussian trial functions"
        )
    return Box(low=low, high=high, dtype=np.float64, seed=seed)


class WitnessSearch:
    """Multi-start coordinate descent for max ||A f||_p / ||f||_p over
    modulated Gaussian superpositions.

    Attributes:
        operator: linear map on grid functions
        p: exponent of the norm
        config: budget and trial family
        hint_frequency: frequency used by start 0, e.g. where |a| peaks
    """

    def __init__(
            self,
            operator: Operator,
            p: VariableExponent,
            config: SearchConfig,
            hint_frequency: float = 0.0,
            threads: Optional[int] = None
        ):
        if config.starts < 1 or config.iters < 1:
            raise BudgetZero(f"Witness search needs starts >= 1 and iters >= 1, got {config.starts}, {config.iters}")
        if config.gaussians < 1:
            raise BudgetZero("Witness search needs at least one Gaussian per trial function")
        parameter_space(config, config.seed)
        self.operator = operator
        self.p = p
        self.config = config
        self.grid = config.grid
        self.hint_frequency = hint_frequency
        self.threads = threads if threads is not None else get_defaults().threads

    def ratio(self, vector: np.ndarray) -> float:
        f = Witness.from_vector(vector).sample(self.grid)
        if f.is_zero:
            return 0.0
        denominator = luxemburg_norm(f, self.p)
        if denominator == 0.0:
            return 0.0
        return luxemburg_norm(self.operator(f), self.p) / denominator

    def _initial(self, index: int, space: Box) -> np.ndarray:
        if index > 0:
            return space.sample()
        x0 = np.array(space.high, dtype=float)
        x0[0::PARAMS_PER_GAUSSIAN] = 0.0
        x0[2::PARAMS_PER_GAUSSIAN] = np.clip(self.hint_frequency, space.low[2], space.high[2])
        x0[3::PARAMS_PER_GAUSSIAN] = 0.0
        x0[3] = 1.0
        return x0

    def _run_start(self, index: int) -> Tuple[float, np.ndarray, int]:
        logger = get_logger(__name__)
        space = parameter_space(self.config, self.config.seed + index)
        x = self._initial(index, space)
        if not space.contains(x):
            raise ConfigError(f"Initial point of start {index} lies outside the search box")
        best = self.ratio(x)
        evaluations = 1
        steps = (space.high - space.low) / 8.0
        floor = MIN_STEP_FRACTION * (space.high - space.low)

        for sweep in range(self.config.iters):
            improved = False
            for d in range(len(x)):
                for direction in (1.0, -1.0):
                    trial = x.copy()
                    trial[d] = np.clip(trial[d] + direction * steps[d], space.low[d], space.high[d])
                    if trial[d] == x[d]:
                        continue
                    value = self.ratio(trial)
                    evaluations += 1
                    if value > best:
                        best, x, improved = value, trial, True
                        break
            if not improved:
                steps = steps / 2.0
                if np.all(steps < floor):
                    break
        logger.debug(f"Witness start {index}: ratio {best:.9g} after {evaluations} evaluations")
        return best, x, evaluations

    def run(self) -> LowerBound:
        results = run_parallel(
            [lambda i=i: self._run_start(i) for i in range(self.config.starts)],
            self.threads
        )
        best_index = 0
        for i, (value, _, _) in enumerate(results):
            if value > results[best_index][0]:
                best_index = i
        value, vector, _ = results[best_index]
        return LowerBound(
            value=float(value),
            witness=Witness.from_vector(vector),
            start=best_index,
            evaluations=sum(r[2] for r in results)
        )


def opnorm_lower(
        operator: Operator,
        p: VariableExponent,
        search: Optional[SearchConfig] = None,
        hint_frequency: float = 0.0
    ) -> LowerBound:
    """Lower bound of the norm of a linear operator on L^p(.) by witness search.

    :raises BudgetZero: starts or iterations below one
    :raises ConfigError: search grid too coarse for the trial family
    """
    if search is None:
        search = SearchConfig.from_defaults()
    return WitnessSearch(operator, p, search, hint_frequency).run()
