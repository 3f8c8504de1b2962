import os
import json
import asyncio
import logging
import configparser
import dataclasses

from enum import Enum
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, Type, TypeVar

import numpy as np

from vlex_multipliers.errors import ConfigError


LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"
PACKAGE_LOGGER = "vlex_multipliers"
ENV_THREADS = "VLEX_THREADS"

T = TypeVar("T")

_handler_installed = False


def get_logger(name: str) -> logging.Logger:
    """Returns a logger below the package logger. The package logger gets a
    single stream handler the first time any logger is requested.

    :param name: usually ``__name__`` of the calling module
    :return: logger instance
    """
    global _handler_installed
    if not _handler_installed:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        package_logger = logging.getLogger(PACKAGE_LOGGER)
        package_logger.addHandler(handler)
        package_logger.setLevel(logging.WARNING)
        _handler_installed = True
    return logging.getLogger(name)


def set_log_level(level: int):
    get_logger(PACKAGE_LOGGER).setLevel(level)


def retrieve_value_from_config(
        config: configparser.ConfigParser,
        section: str,
        field: str,
        value_type: Type[T],
        description: str,
        parameter: Optional[T] = None
    ) -> T:
    """Reads a single value from a parsed INI configuration. An explicitly
    passed parameter always wins over the configuration file.

    :param config: parsed configuration
    :param section: INI section name
    :param field: key within the section
    :param value_type: type the raw string is converted to
    :param description: human readable name used in error messages
    :param parameter: explicit override, ignored when None
    :raises ConfigError: if the value is missing or cannot be converted
    :return: the converted value
    """
    if parameter is not None:
        return parameter
    if not config.has_option(section, field):
        raise ConfigError(
            f"No value for {description} ('{section}.{field}') in config"
        )
    try:
        if value_type is bool:
            return config.getboolean(section, field)
        return value_type(config.get(section, field))
    except ValueError as e:
        raise ConfigError(
            f"Value of {description} ('{section}.{field}') is not a valid "
            f"{value_type.__name__}: {config.get(section, field)!r}"
        ) from e


def resolve_threads(configured: int) -> int:
    """Thread cap: the VLEX_THREADS environment variable overrides the
    configured value; the result is at least one.
    """
    raw = os.environ.get(ENV_THREADS)
    if raw is not None and raw.strip() != "":
        try:
            configured = int(raw)
        except ValueError as e:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {raw!r}") from e
    return max(1, int(configured))


def run_parallel(jobs: Sequence[Callable[[], T]], threads: int) -> List[T]:
    """Runs independent jobs on a thread pool driven by an asyncio loop and
    returns their results in job order, independent of completion order.

    :param jobs: zero-argument callables
    :param threads: maximal number of worker threads
    :return: list of results, ``results[i]`` belongs to ``jobs[i]``
    """
    if threads <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]

    async def _run() -> List[T]:
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = [loop.run_in_executor(executor, job) for job in jobs]
            return await asyncio.gather(*futures)

    return list(asyncio.run(_run()))


class ReportEncoder(json.JSONEncoder):
    """JSON encoder for numpy scalars, complex numbers, enums and
    dataclasses. Complex numbers are written as ``[re, im]``.
    """

    def default(self, obj: Any):
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, (np.integer,)):
            return int(obj)
        if isinstance(obj, (np.floating,)):
            return float(obj)
        if isinstance(obj, (complex, np.complexfloating)):
            return [float(obj.real), float(obj.imag)]
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return dataclasses.asdict(obj)
        if hasattr(obj, "to_dict"):
            return obj.to_dict()
        return super().default(obj)


def canonical_json(payload: Any) -> str:
    return json.dumps(
        payload,
        cls=ReportEncoder,
        sort_keys=True,
        separators=(",", ":"),
        allow_nan=False
    )


def encode_complex(value: complex):
    """Scalar encoding used inside specs: plain float for real values,
    ``[re, im]`` otherwise.
    """
    value = complex(value)
    if value.imag == 0.0:
        return float(value.real)
    return [float(value.real), float(value.imag)]


def decode_complex(raw: Any) -> complex:
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise ValueError(f"complex value must be [re, im], got {raw!r}")
        return complex(float(raw[0]), float(raw[1]))
    return complex(float(raw))
