import os
import functools
import configparser

from dataclasses import dataclass
from typing import Optional

from vlex_multipliers.utils import (
    get_logger,
    retrieve_value_from_config,
    resolve_threads
)

DEFAULT_CONFIG_FILE = "default_config.ini"

FIELD_GRID = "grid"
FIELD_SEARCH = "search"
FIELD_LUXEMBURG = "luxemburg"
FIELD_CERTIFICATE = "certificate"
FIELD_ORACLE = "oracle"
FIELD_PARALLEL = "parallel"

FIELD_HALF_WIDTH = "half_width"
FIELD_COUNT = "count"
FIELD_SEED = "seed"
FIELD_STARTS = "starts"
FIELD_ITERS = "iters"
FIELD_GAUSSIANS = "gaussians"
FIELD_RTOL = "rtol"
FIELD_DISCRETE_RTOL = "discrete_rtol"
FIELD_CORE_HALF_WIDTH = "core_half_width"
FIELD_CORE_COUNT = "core_count"
FIELD_ANNULUS_COUNT = "annulus_count"
FIELD_BREAKPOINT_COUNT = "breakpoint_count"
FIELD_MAX_DOUBLINGS = "max_doublings"
FIELD_MIN_DELTA = "min_delta"
FIELD_SERIES_SWITCH = "series_switch"
FIELD_REPLAY_TOLERANCE = "replay_tolerance"
FIELD_RESTARTS = "restarts"
FIELD_MAX_ITERS = "max_iters"
FIELD_STATIONARITY = "stationarity"
FIELD_MAX_DIMENSION = "max_dimension"
FIELD_THREADS = "threads"

# used when default_config.ini is not shipped next to the package
FALLBACK_VALUES = {
    FIELD_GRID: {FIELD_HALF_WIDTH: "20.0", FIELD_COUNT: "4096"},
    FIELD_SEARCH: {
        FIELD_SEED: "1234",
        FIELD_STARTS: "8",
        FIELD_ITERS: "60",
        FIELD_GAUSSIANS: "1",
        FIELD_HALF_WIDTH: "128.0",
        FIELD_COUNT: "4096",
    },
    FIELD_LUXEMBURG: {FIELD_RTOL: "1e-10", FIELD_DISCRETE_RTOL: "1e-14"},
    FIELD_CERTIFICATE: {
        FIELD_CORE_HALF_WIDTH: "8.0",
        FIELD_CORE_COUNT: "4096",
        FIELD_ANNULUS_COUNT: "512",
        FIELD_BREAKPOINT_COUNT: "64",
        FIELD_MAX_DOUBLINGS: "52",
        FIELD_MIN_DELTA: "1e-18",
        FIELD_SERIES_SWITCH: "1e-3",
        FIELD_REPLAY_TOLERANCE: "1e-12",
    },
    FIELD_ORACLE: {
        FIELD_RESTARTS: "32",
        FIELD_MAX_ITERS: "400",
        FIELD_STATIONARITY: "1e-12",
        FIELD_MAX_DIMENSION: "64",
    },
    FIELD_PARALLEL: {FIELD_THREADS: "4"},
}


@dataclass(frozen=True)
class Defaults:
    """Library-wide numerical defaults read from an INI file.

    Attributes:
        grid_half_width: half width L of the default evaluation grid
        grid_count: node count N of the default evaluation grid
        search_*: witness search budget and its evaluation grid
        luxemburg_rtol: relative tolerance of grid Luxemburg norms
        discrete_rtol: relative tolerance of discrete Luxemburg norms
        core_*, annulus_count, breakpoint_count: certificate probe layout
        max_doublings: budget for the cutoff search of the pipelines
        min_delta: smallest mollification width tried before giving up
        series_switch: width below which the mollification defect is
            evaluated by its moment series
        replay_tolerance: tolerance of certificate arithmetic replay
        oracle_*: budget of the discrete operator-norm ascent
        threads: worker cap, overridden by VLEX_THREADS
    """
    grid_half_width: float
    grid_count: int
    search_seed: int
    search_starts: int
    search_iters: int
    search_gaussians: int
    search_half_width: float
    search_count: int
    luxemburg_rtol: float
    discrete_rtol: float
    core_half_width: float
    core_count: int
    annulus_count: int
    breakpoint_count: int
    max_doublings: int
    min_delta: float
    series_switch: float
    replay_tolerance: float
    oracle_restarts: int
    oracle_max_iters: int
    oracle_stationarity: float
    oracle_max_dimension: int
    threads: int


def default_config_path() -> str:
    full_path = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    return os.path.join(full_path, DEFAULT_CONFIG_FILE)


def load_defaults(config_file_path: Optional[str] = None) -> Defaults:
    """Reads the numerical defaults.

    :param config_file_path: path to an INI file with the sections of
        'default_config.ini'. Defaults to the file shipped at the repository
        root; missing keys fall back to built-in values.
    :raises ConfigError: if a present value cannot be converted
    :return: resolved defaults
    """
    if config_file_path is None:
        config_file_path = default_config_path()

    config = configparser.ConfigParser()
    config.read_dict(FALLBACK_VALUES)
    read = config.read(config_file_path)
    if not read:
        get_logger(__name__).debug(
            f"Config file '{config_file_path}' not found, using fallback values"
        )

    def value(section, field, value_type, description):
        return retrieve_value_from_config(
            config, section, field, value_type, description
        )

    return Defaults(
        grid_half_width=value(FIELD_GRID, FIELD_HALF_WIDTH, float, "grid half width"),
        grid_count=value(FIELD_GRID, FIELD_COUNT, int, "grid count"),
        search_seed=value(FIELD_SEARCH, FIELD_SEED, int, "search seed"),
        search_starts=value(FIELD_SEARCH, FIELD_STARTS, int, "search starts"),
        search_iters=value(FIELD_SEARCH, FIELD_ITERS, int, "search iterations"),
        search_gaussians=value(FIELD_SEARCH, FIELD_GAUSSIANS, int, "gaussians per witness"),
        search_half_width=value(FIELD_SEARCH, FIELD_HALF_WIDTH, float, "search grid half width"),
        search_count=value(FIELD_SEARCH, FIELD_COUNT, int, "search grid count"),
        luxemburg_rtol=value(FIELD_LUXEMBURG, FIELD_RTOL, float, "Luxemburg tolerance"),
        discrete_rtol=value(FIELD_LUXEMBURG, FIELD_DISCRETE_RTOL, float, "discrete Luxemburg tolerance"),
        core_half_width=value(FIELD_CERTIFICATE, FIELD_CORE_HALF_WIDTH, float, "probe core half width"),
        core_count=value(FIELD_CERTIFICATE, FIELD_CORE_COUNT, int, "probe core count"),
        annulus_count=value(FIELD_CERTIFICATE, FIELD_ANNULUS_COUNT, int, "probe annulus count"),
        breakpoint_count=value(FIELD_CERTIFICATE, FIELD_BREAKPOINT_COUNT, int, "probe breakpoint count"),
        max_doublings=value(FIELD_CERTIFICATE, FIELD_MAX_DOUBLINGS, int, "cutoff doublings"),
        min_delta=value(FIELD_CERTIFICATE, FIELD_MIN_DELTA, float, "minimal mollification width"),
        series_switch=value(FIELD_CERTIFICATE, FIELD_SERIES_SWITCH, float, "series switch width"),
        replay_tolerance=value(FIELD_CERTIFICATE, FIELD_REPLAY_TOLERANCE, float, "replay tolerance"),
        oracle_restarts=value(FIELD_ORACLE, FIELD_RESTARTS, int, "oracle restarts"),
        oracle_max_iters=value(FIELD_ORACLE, FIELD_MAX_ITERS, int, "oracle iterations"),
        oracle_stationarity=value(FIELD_ORACLE, FIELD_STATIONARITY, float, "oracle stationarity"),
        oracle_max_dimension=value(FIELD_ORACLE, FIELD_MAX_DIMENSION, int, "oracle dimension cap"),
        threads=resolve_threads(value(FIELD_PARALLEL, FIELD_THREADS, int, "threads")),
    )


@functools.lru_cache(maxsize=1)
def get_defaults() -> Defaults:
    return load_defaults()
