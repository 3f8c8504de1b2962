import sys
import logging
import argparse

from typing import List, Optional

from vlex_multipliers.cli import commands
from vlex_multipliers.cli.ExperimentConfig import FORMATS, ExperimentConfig
from vlex_multipliers.cli.reports import emit, write_report
from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import VlexError
from vlex_multipliers.utils import get_logger, set_log_level


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlex",
        description="Norms, multiplier brackets, approximation certificates and "
                    "oracle suites on variable exponent Lebesgue spaces.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Exit codes: 0 ok, 1 violations or failed replay, 2 parse or config "
               "error, 3 domain error, 4 failed precondition.",
    )
    parser.add_argument("--config", metavar="PATH", default=None, help="JSON experiment file")
    parser.add_argument("--seed", type=int, default=None, help="Global seed of all stochastic searches")
    parser.add_argument("--out", metavar="DIR", default=None, help="Report directory (default: reports)")
    parser.add_argument("--format", choices=FORMATS, default=None, help="Format printed to standard output")
    parser.add_argument("--exponent", default=None, help="Configured exponent name or a constant value")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")

    subparsers = parser.add_subparsers(dest="command", required=True)

    norm = subparsers.add_parser("norm", help="Luxemburg norm of a function or sequence file")
    norm.add_argument("function_file", help="CSV with header t,re,im or w,p,re,im")

    mulnorm = subparsers.add_parser("mulnorm", help="Bracket of a multiplier norm")
    mulnorm.add_argument("symbol", help="Configured symbol name or JSON symbol file")

    approximate = subparsers.add_parser("approximate", help="Approximation certificate")
    approximate.add_argument("symbol", help="Configured symbol name or JSON symbol file")
    approximate.add_argument("--mode", choices=commands.MODES, default=commands.MODE_A)
    approximate.add_argument("--epsilon", type=float, default=None)
    approximate.add_argument(
        "--consistency", action="store_true", help="Compare the certified total with the cyclic DFT model"
    )

    replay = subparsers.add_parser("replay", help="Re-verify a stored certificate")
    replay.add_argument("certificate_file")

    subparsers.add_parser("suite", help="Property suite on the cyclic DFT model")
    subparsers.add_parser("oracle", help="Riesz-Thorin corpus")
    return parser


def run(args: argparse.Namespace, config: ExperimentConfig) -> commands.CommandResult:
    if args.command == "norm":
        return commands.cmd_norm(config, args.function_file, args.exponent)
    if args.command == "mulnorm":
        return commands.cmd_mulnorm(config, args.symbol, args.exponent)
    if args.command == "approximate":
        return commands.cmd_approximate(
            config, args.symbol, args.mode, args.epsilon, args.exponent, args.consistency
        )
    if args.command == "replay":
        return commands.cmd_replay(config, args.certificate_file)
    if args.command == "suite":
        return commands.cmd_suite(config)
    if args.command == "oracle":
        return commands.cmd_oracle(config)
    raise ValueError(f"Unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the ``vlex`` console script. Reports embed the
    resolved experiment config unless the command records its own.

    :return: process exit code
    """
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_log_level(logging.DEBUG)
    try:
        config = ExperimentConfig.load(args.config, seed=args.seed, out=args.out, output_format=args.format)
        result = run(args, config)
        payload = dict(result.payload)
        payload.setdefault("config", config.to_dict())
        write_report(config.output_directory, result.command, payload, get_defaults().threads, result.suite)
        emit(payload, config.output_format, result.suite)
    except VlexError as e:
        get_logger(__name__).error(f"{type(e).__name__}: {e}")
        return e.exit_code
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
