"""Subcommands of the ``vlex`` front-end.

Every command turns an ``ExperimentConfig`` and its own arguments into a
``CommandResult``; writing reports and printing is left to ``main``.
"""
import json

from dataclasses import dataclass
from typing import Any, Dict, Optional

from vlex_multipliers.cli.ExperimentConfig import CertificateOptionKeys, ExperimentConfig, OracleOptionKeys
from vlex_multipliers.cli.reports import read_report
from vlex_multipliers.errors import (
    EXIT_OK,
    EXIT_VIOLATIONS,
    ConfigError,
    SpecParseError
)
from vlex_multipliers.exponent.transforms import Decomposition, constant_decomposition, diening_decomposition
from vlex_multipliers.exponent.VariableExponent import VariableExponent
from vlex_multipliers.grid.GridFunction import read_csv as read_grid_csv
from vlex_multipliers.grid.norms import luxemburg_norm
from vlex_multipliers.oracle.DiscreteSpace import CSV_HEADER as SEQUENCE_CSV_HEADER
from vlex_multipliers.oracle.DiscreteSpace import discrete_luxemburg
from vlex_multipliers.oracle.DiscreteSpace import read_csv as read_sequence_csv
from vlex_multipliers.oracle.suite import (
    SuiteConfig,
    SuiteReport,
    default_s_bounds,
    discrete_consistency,
    run_property_suite,
    run_riesz_thorin_corpus
)
from vlex_multipliers.pipelines import (
    ApproximationCertificate,
    ProbeLayout,
    certify_bar_continuous,
    certify_c0_cloud,
    certify_c0_variation,
    certify_dot_continuous,
    certify_finite_jumps,
    certify_pc_quantization
)
from vlex_multipliers.symbols.Symbol import MultiplierSymbol
from vlex_multipliers.transform.estimates import multiplier_norm_bounds
from vlex_multipliers.utils import get_logger

DEFAULT_THETA = 0.25
DEFAULT_P0 = 2.0
DEFAULT_METHOD = "cloud"

MODE_A = "a"
MODE_B = "b"
MODE_DOT = "dot"
MODE_BAR = "bar"
MODE_JUMPS = "jumps"
MODE_QUANTIZATION = "quantization"
MODES = (MODE_A, MODE_B, MODE_DOT, MODE_BAR, MODE_JUMPS, MODE_QUANTIZATION)

SEQUENCE_HEADER = ",".join(SEQUENCE_CSV_HEADER)


@dataclass(frozen=True)
class CommandResult:
    """Outcome of one subcommand.

    Attributes:
        command: subcommand name, prefix of the report file
        payload: report content
        exit_code: 0, or 1 for suite violations and failed replays
        suite: suite report, also written as CSV
    """
    command: str
    payload: Dict[str, Any]
    exit_code: int = EXIT_OK
    suite: Optional[SuiteReport] = None


def _first_line(path: str) -> str:
    try:
        with open(path) as handle:
            return handle.readline().strip().replace(" ", "")
    except OSError as e:
        raise SpecParseError(f"Cannot read '{path}': {e}") from e


def cmd_norm(config: ExperimentConfig, function_file: str, exponent: Optional[str] = None) -> CommandResult:
    """Luxemburg norm of a grid function (``t,re,im``) or of a weighted
    sequence (``w,p,re,im``; the exponent then comes from the file)."""
    if _first_line(function_file) == SEQUENCE_HEADER:
        v, space = read_sequence_csv(function_file)
        value = discrete_luxemburg(v, space)
        payload = {
            "kind": "sequence",
            "norm": value,
            "space": space.to_dict(),
        }
    else:
        p = config.exponent(exponent)
        f = read_grid_csv(function_file, config.grid)
        value = luxemburg_norm(f, p)
        payload = {
            "kind": "grid",
            "norm": value,
            "grid": f.grid.to_dict(),
            "p": p.spec(),
        }
    get_logger(__name__).debug(f"Norm of {function_file}: {value:.15g}")
    return CommandResult("norm", payload)


def cmd_mulnorm(config: ExperimentConfig, symbol: str, exponent: Optional[str] = None) -> CommandResult:
    """Bracket of the multiplier norm; the bound for S is looked up under
    the exponent name in ``s_bounds``."""
    a = config.symbol(symbol)
    p = config.exponent(exponent)
    name = config.exponent_name(exponent)
    s_bound = config.s_bounds.get(name) if name is not None else None
    try:
        estimate = multiplier_norm_bounds(a, p, s_bound=s_bound, search=config.search)
    except ValueError as e:
        raise ConfigError(f"Invalid s_bound for exponent {name!r}: {e}") from e
    return CommandResult("mulnorm", {"symbol": a.spec(), "estimate": estimate.to_dict()})


# -- certificates ------------------------------------------------------------------

def _option(config: ExperimentConfig, key: str, default=None):
    return config.certificate.get(key, default)


def _float_option(config: ExperimentConfig, key: str) -> Optional[float]:
    value = _option(config, key)
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Certificate option '{key}' must be a number, got {value!r}") from e


def default_q(p0: float) -> float:
    """Auxiliary exponent: 2 p0 above 2, the midpoint of (1, p0) below."""
    return 2.0 * p0 if p0 >= 2.0 else 0.5 * (1.0 + p0)


def _decomposition(config: ExperimentConfig, p: VariableExponent) -> Decomposition:
    p0 = _float_option(config, CertificateOptionKeys.P0)
    p0 = DEFAULT_P0 if p0 is None else p0
    theta = _float_option(config, CertificateOptionKeys.THETA)
    if p.is_constant:
        return constant_decomposition(p.p_minus, theta, p0)
    return diening_decomposition(p, p0, DEFAULT_THETA if theta is None else theta)


def _layout(config: ExperimentConfig) -> Optional[ProbeLayout]:
    raw = _option(config, CertificateOptionKeys.LAYOUT)
    if raw is None:
        return None
    try:
        return ProbeLayout.from_dict(raw)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed probe layout: {e}") from e


def _cloud_options(config: ExperimentConfig) -> Dict[str, Any]:
    theta = _float_option(config, CertificateOptionKeys.THETA)
    return {
        "theta": DEFAULT_THETA if theta is None else theta,
        "s_bound_theta": _float_option(config, CertificateOptionKeys.S_BOUND_THETA),
        "a_theta": _float_option(config, CertificateOptionKeys.A_THETA),
        "tau": _float_option(config, CertificateOptionKeys.TAU),
        "layout": _layout(config),
    }


def _variation_options(config: ExperimentConfig, p: VariableExponent) -> Dict[str, Any]:
    decomposition = _decomposition(config, p)
    q = _float_option(config, CertificateOptionKeys.Q)
    return {
        "decomposition": decomposition,
        "q": default_q(decomposition.p0) if q is None else q,
        "s_theta": _float_option(config, CertificateOptionKeys.S_THETA),
        "s_q": _float_option(config, CertificateOptionKeys.S_Q),
        "layout": _layout(config),
    }


def approximate(
        config: ExperimentConfig,
        a: MultiplierSymbol,
        p: VariableExponent,
        epsilon: float,
        mode: str
    ) -> ApproximationCertificate:
    """Runs the certificate pipeline of ``mode`` with the options of the
    ``certificate`` config section.

    :raises ConfigError: unknown mode or method
    """
    if mode == MODE_A:
        return certify_c0_cloud(a, p, epsilon=epsilon, **_cloud_options(config))
    if mode == MODE_B:
        return certify_c0_variation(a, p, epsilon=epsilon, **_variation_options(config, p))
    if mode == MODE_QUANTIZATION:
        return certify_pc_quantization(a, p, epsilon=epsilon, **_variation_options(config, p))

    method = str(_option(config, CertificateOptionKeys.METHOD, DEFAULT_METHOD))
    if method == "cloud":
        options = _cloud_options(config)
    elif method == "variation":
        options = _variation_options(config, p)
    else:
        raise ConfigError(f"Unknown certificate method {method!r}, use cloud or variation")
    pipelines = {
        MODE_DOT: certify_dot_continuous,
        MODE_BAR: certify_bar_continuous,
        MODE_JUMPS: certify_finite_jumps,
    }
    if mode not in pipelines:
        raise ConfigError(f"Unknown mode {mode!r}, use one of {MODES}")
    return pipelines[mode](a, p, epsilon, method=method, **options)


def cmd_approximate(
        config: ExperimentConfig,
        symbol: str,
        mode: str = MODE_A,
        epsilon: Optional[float] = None,
        exponent: Optional[str] = None,
        consistency: bool = False
    ) -> CommandResult:
    """Certificate for ``symbol``, its arithmetic replay and, on request,
    the comparison with the cyclic DFT model."""
    a = config.symbol(symbol)
    p = config.exponent(exponent)
    if epsilon is None:
        epsilon = _float_option(config, CertificateOptionKeys.EPSILON)
    if epsilon is None:
        raise ConfigError("No epsilon: pass --epsilon or set certificate.epsilon")
    try:
        certificate = approximate(config, a, p, float(epsilon), mode)
    except ValueError as e:
        raise ConfigError(f"Invalid certificate options: {e}") from e

    replay = certificate.replay()
    payload = {"certificate": certificate.to_dict(), "replay": replay.to_dict()}
    if consistency:
        row = discrete_consistency(a, certificate.approximant, certificate.certified_total, p, seed=config.seed)
        payload["consistency"] = row.to_dict()
    get_logger(__name__).debug(
        f"Certificate for {a.name!r} ({mode}): total {certificate.certified_total:.9g} < {epsilon}"
    )
    return CommandResult("approximate", payload, EXIT_OK if replay.ok else EXIT_VIOLATIONS)


def cmd_replay(config: ExperimentConfig, certificate_file: str) -> CommandResult:
    """Re-evaluates a stored certificate; a report written by
    ``approximate`` is accepted as well."""
    try:
        raw = read_report(certificate_file)
    except OSError as e:
        raise SpecParseError(f"Cannot read certificate '{certificate_file}': {e}") from e
    except json.JSONDecodeError as e:
        raise SpecParseError(f"Certificate '{certificate_file}' is not valid JSON: {e}") from e
    if isinstance(raw, dict) and isinstance(raw.get("certificate"), dict):
        raw = raw["certificate"]
    if not isinstance(raw, dict):
        raise SpecParseError(f"Certificate '{certificate_file}' must hold a JSON object")
    certificate = ApproximationCertificate.from_dict(raw)

    replay = certificate.replay()
    payload = {"target_id": certificate.target_id, "replay": replay.to_dict()}
    ok = replay.ok
    if certificate.target is not None:
        honesty = certificate.honesty_check()
        payload["honesty"] = honesty.to_dict()
        ok = ok and honesty.ok
    if not ok:
        get_logger(__name__).error(f"Replay of {certificate_file} failed: {replay.issues}")
    return CommandResult("replay", payload, EXIT_OK if ok else EXIT_VIOLATIONS)


# -- oracle ------------------------------------------------------------------------

def cmd_suite(config: ExperimentConfig, threads: Optional[int] = None) -> CommandResult:
    """Property suite over the configured (or default) symbols and exponents.
    Configured s_bounds override the defaults of the default exponents."""
    s_bounds = dict(config.s_bounds)
    if not config.exponents_given:
        s_bounds = dict(default_s_bounds(), **s_bounds)
    suite_config = SuiteConfig.from_dict(
        config.suite,
        config.seed,
        symbols=config.symbols if config.symbols_given else None,
        exponents=config.exponents if config.exponents_given else None,
        s_bounds=s_bounds,
    )
    report = run_property_suite(suite_config, threads)
    payload = {"config": suite_config.to_dict(), "report": report.to_dict()}
    if not report.ok:
        get_logger(__name__).error(f"Property suite: {len(report.violations)} hard violations")
    return CommandResult("suite", payload, EXIT_OK if report.ok else EXIT_VIOLATIONS, report)


def cmd_oracle(config: ExperimentConfig, threads: Optional[int] = None) -> CommandResult:
    """Riesz-Thorin corpus with constant endpoints and, unless disabled,
    with variable endpoints."""
    options = config.oracle
    try:
        settings = {
            "count": int(options.get(OracleOptionKeys.COUNT, 100)),
            "size": int(options.get(OracleOptionKeys.SIZE, 8)),
            "p0": float(options.get(OracleOptionKeys.P0, 2.0)),
            "p1": float(options.get(OracleOptionKeys.P1, 4.0)),
            "thetas": tuple(float(t) for t in options.get(OracleOptionKeys.THETAS, (0.25, 0.5, 0.75))),
            "restarts": options.get(OracleOptionKeys.RESTARTS),
            "max_iters": options.get(OracleOptionKeys.MAX_ITERS),
        }
        variable = bool(options.get(OracleOptionKeys.VARIABLE, True))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Malformed oracle config: {e}") from e

    report = run_riesz_thorin_corpus(seed=config.seed, variable=False, threads=threads, **settings)
    if variable:
        report = report.merged(
            run_riesz_thorin_corpus(seed=config.seed, variable=True, threads=threads, **settings)
        )
    payload = {
        "config": dict(settings, thetas=list(settings["thetas"]), variable=variable, seed=config.seed),
        "report": report.to_dict(),
    }
    if not report.ok:
        get_logger(__name__).error(f"Riesz-Thorin corpus: {len(report.violations)} hard violations")
    return CommandResult("oracle", payload, EXIT_OK if report.ok else EXIT_VIOLATIONS, report)
