import json
import dataclasses

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import ConfigError, SpecParseError
from vlex_multipliers.exponent.VariableExponent import ConstantExponent, VariableExponent
from vlex_multipliers.grid.GridFunction import Grid
from vlex_multipliers.symbols.Symbol import MultiplierSymbol
from vlex_multipliers.transform.WitnessSearch import SearchConfig

DEFAULT_OUTPUT_DIRECTORY = "reports"
FORMATS = ("json", "csv")


class ExperimentKeys():
    SEED = "seed"
    GRID = "grid"
    EXPONENTS = "exponents"
    SYMBOLS = "symbols"
    S_BOUNDS = "s_bounds"
    SEARCH = "search"
    CERTIFICATE = "certificate"
    SUITE = "suite"
    ORACLE = "oracle"
    OUTPUT = "output"
    HALF_WIDTH = "half_width"
    COUNT = "count"
    DIRECTORY = "directory"
    FORMAT = "format"


class CertificateOptionKeys():
    EPSILON = "epsilon"
    THETA = "theta"
    METHOD = "method"
    TAU = "tau"
    S_BOUND_THETA = "s_bound_theta"
    A_THETA = "a_theta"
    P0 = "p0"
    Q = "q"
    S_THETA = "s_theta"
    S_Q = "s_q"
    LAYOUT = "layout"


class OracleOptionKeys():
    COUNT = "count"
    SIZE = "size"
    P0 = "p0"
    P1 = "p1"
    THETAS = "thetas"
    VARIABLE = "variable"
    RESTARTS = "restarts"
    MAX_ITERS = "max_iters"


TOP_LEVEL_KEYS = {
    ExperimentKeys.SEED, ExperimentKeys.GRID, ExperimentKeys.EXPONENTS, ExperimentKeys.SYMBOLS,
    ExperimentKeys.S_BOUNDS, ExperimentKeys.SEARCH, ExperimentKeys.CERTIFICATE, ExperimentKeys.SUITE,
    ExperimentKeys.ORACLE, ExperimentKeys.OUTPUT,
}
CERTIFICATE_KEYS = {
    v for k, v in vars(CertificateOptionKeys).items() if not k.startswith("_")
}
ORACLE_KEYS = {
    v for k, v in vars(OracleOptionKeys).items() if not k.startswith("_")
}


def _section(raw: Dict[str, Any], key: str, allowed=None) -> Dict[str, Any]:
    value = raw.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"Config member '{key}' must be an object, got {type(value).__name__}")
    if allowed is not None:
        unknown = set(value) - set(allowed)
        if unknown:
            raise ConfigError(f"Unknown keys in '{key}': {sorted(unknown)}")
    return value


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Resolved experiment: INI defaults, then the JSON file, then command
    line flags.

    Attributes:
        seed: global seed of every stochastic search
        grid: grid expected for function files, None to infer it
        exponents: name -> exponent
        symbols: name -> symbol
        s_bounds: exponent name -> bound for the norm of S
        search: witness search budget
        certificate: options of the certificate pipelines
        suite: raw suite section, read by ``SuiteConfig.from_dict``
        oracle: options of the Riesz-Thorin corpus
        output_directory: where reports are written
        output_format: json or csv for standard output
        symbols_given, exponents_given: the JSON file lists them itself,
            possibly empty
        raw: the parsed JSON document
    """
    seed: int
    grid: Optional[Grid]
    exponents: Dict[str, VariableExponent]
    symbols: Dict[str, MultiplierSymbol]
    s_bounds: Dict[str, float]
    search: SearchConfig
    certificate: Dict[str, Any]
    suite: Dict[str, Any]
    oracle: Dict[str, Any]
    output_directory: str = DEFAULT_OUTPUT_DIRECTORY
    output_format: str = "json"
    symbols_given: bool = False
    exponents_given: bool = False
    raw: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def load(
            cls,
            path: Optional[str] = None,
            seed: Optional[int] = None,
            out: Optional[str] = None,
            output_format: Optional[str] = None
        ) -> "ExperimentConfig":
        """Reads a JSON experiment file; without a path only the INI defaults
        and the flags apply.

        :raises ConfigError: unreadable file, invalid JSON or unknown keys
        """
        raw: Dict[str, Any] = {}
        if path is not None:
            try:
                with open(path) as handle:
                    raw = json.load(handle)
            except OSError as e:
                raise ConfigError(f"Cannot read config file '{path}': {e}") from e
            except json.JSONDecodeError as e:
                raise ConfigError(f"Config file '{path}' is not valid JSON: {e}") from e
        return cls.from_dict(raw, seed=seed, out=out, output_format=output_format)

    @classmethod
    def from_dict(
            cls,
            raw: Dict[str, Any],
            seed: Optional[int] = None,
            out: Optional[str] = None,
            output_format: Optional[str] = None
        ) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("An experiment config must be a JSON object")
        unknown = set(raw) - TOP_LEVEL_KEYS
        if unknown:
            raise ConfigError(f"Unknown keys in experiment config: {sorted(unknown)}")

        search = SearchConfig.from_dict(_section(raw, ExperimentKeys.SEARCH))
        try:
            if seed is None:
                seed = int(raw.get(ExperimentKeys.SEED, search.seed))
            if seed < 0:
                raise ValueError(f"seed must be non-negative, got {seed}")
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Malformed seed: {e}") from e
        search = dataclasses.replace(search, seed=int(seed))

        grid_raw = _section(raw, ExperimentKeys.GRID, {ExperimentKeys.HALF_WIDTH, ExperimentKeys.COUNT})
        grid = None
        if grid_raw:
            defaults = get_defaults()
            try:
                grid = Grid(
                    float(grid_raw.get(ExperimentKeys.HALF_WIDTH, defaults.grid_half_width)),
                    int(grid_raw.get(ExperimentKeys.COUNT, defaults.grid_count))
                )
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Malformed grid: {e}") from e

        exponents = {
            str(name): VariableExponent.from_spec(spec)
            for name, spec in _section(raw, ExperimentKeys.EXPONENTS).items()
        }
        symbols = {}
        for name, spec in _section(raw, ExperimentKeys.SYMBOLS).items():
            if isinstance(spec, dict) and "name" not in spec:
                spec = dict(spec, name=name)
            symbols[str(name)] = MultiplierSymbol.from_spec(spec)
        try:
            s_bounds = {str(k): float(v) for k, v in _section(raw, ExperimentKeys.S_BOUNDS).items()}
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Malformed s_bounds: {e}") from e
        if any(not value > 0.0 for value in s_bounds.values()):
            raise ConfigError("Every s_bound must be positive")

        output = _section(raw, ExperimentKeys.OUTPUT, {ExperimentKeys.DIRECTORY, ExperimentKeys.FORMAT})
        directory = out if out is not None else str(output.get(ExperimentKeys.DIRECTORY, DEFAULT_OUTPUT_DIRECTORY))
        fmt = output_format if output_format is not None else str(output.get(ExperimentKeys.FORMAT, "json"))
        if fmt not in FORMATS:
            raise ConfigError(f"Unknown output format {fmt!r}, use one of {FORMATS}")

        return cls(
            seed=int(seed),
            grid=grid,
            exponents=exponents,
            symbols=symbols,
            s_bounds=s_bounds,
            search=search,
            certificate=dict(_section(raw, ExperimentKeys.CERTIFICATE, CERTIFICATE_KEYS)),
            suite=dict(_section(raw, ExperimentKeys.SUITE)),
            oracle=dict(_section(raw, ExperimentKeys.ORACLE, ORACLE_KEYS)),
            output_directory=directory,
            output_format=fmt,
            symbols_given=ExperimentKeys.SYMBOLS in raw,
            exponents_given=ExperimentKeys.EXPONENTS in raw,
            raw=raw
        )

    def exponent(self, selector: Optional[str] = None) -> VariableExponent:
        """Exponent by name, a number for a constant exponent, or the only
        configured exponent when no selector is given.

        :raises ConfigError: no unique exponent matches
        """
        if selector is not None:
            if selector in self.exponents:
                return self.exponents[selector]
            try:
                return ConstantExponent(float(selector))
            except ValueError:
                raise ConfigError(f"Unknown exponent {selector!r}; configured: {sorted(self.exponents)}")
        if len(self.exponents) == 1:
            return next(iter(self.exponents.values()))
        raise ConfigError(
            f"Select an exponent with --exponent; configured: {sorted(self.exponents)}"
        )

    def exponent_name(self, selector: Optional[str] = None) -> Optional[str]:
        if selector is not None:
            return selector
        if len(self.exponents) == 1:
            return next(iter(self.exponents))
        return None

    def symbol(self, selector: str) -> MultiplierSymbol:
        """Symbol by configured name or from a JSON file holding its spec.

        :raises SpecParseError: unreadable file or malformed spec
        """
        if selector in self.symbols:
            return self.symbols[selector]
        try:
            with open(selector) as handle:
                spec = json.load(handle)
        except OSError as e:
            raise SpecParseError(f"'{selector}' is neither a configured symbol nor a readable file: {e}") from e
        except json.JSONDecodeError as e:
            raise SpecParseError(f"Symbol file '{selector}' is not valid JSON: {e}") from e
        return MultiplierSymbol.from_spec(spec)

    def to_dict(self) -> Dict[str, Any]:
        return {
            ExperimentKeys.SEED: self.seed,
            ExperimentKeys.GRID: None if self.grid is None else self.grid.to_dict(),
            ExperimentKeys.EXPONENTS: {name: p.spec() for name, p in self.exponents.items()},
            ExperimentKeys.SYMBOLS: {name: a.spec() for name, a in self.symbols.items()},
            ExperimentKeys.S_BOUNDS: dict(self.s_bounds),
            ExperimentKeys.SEARCH: self.search.to_dict(),
            ExperimentKeys.CERTIFICATE: dict(self.certificate),
            ExperimentKeys.SUITE: dict(self.suite),
            ExperimentKeys.ORACLE: dict(self.oracle),
        }
