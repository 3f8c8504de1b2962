"""Content-addressed, append-only report files."""
import os
import csv
import sys
import json
import hashlib

from datetime import datetime, timezone
from typing import Any, Dict, Optional

from vlex_multipliers.oracle.suite import CSV_COLUMNS, SuiteReport
from vlex_multipliers.utils import ReportEncoder, canonical_json, get_logger

SIDECAR = "sidecar"
HASH_LENGTH = 16


def content_hash(payload: Dict[str, Any]) -> str:
    """First 16 hex digits of the sha256 of the canonical payload; the
    sidecar member is not part of the content."""
    content = {k: v for k, v in payload.items() if k != SIDECAR}
    return hashlib.sha256(canonical_json(content).encode("utf-8")).hexdigest()[:HASH_LENGTH]


def report_path(directory: str, command: str, payload: Dict[str, Any], extension: str = "json") -> str:
    return os.path.join(directory, f"{command}-{content_hash(payload)}.{extension}")


def write_report(
        directory: str,
        command: str,
        payload: Dict[str, Any],
        threads: int,
        suite: Optional[SuiteReport] = None
    ) -> str:
    """Writes ``<command>-<hash>.json`` and, for suite reports, the CSV next
    to it. Existing files are never overwritten.

    :return: path of the JSON report
    """
    logger = get_logger(__name__)
    os.makedirs(directory, exist_ok=True)
    path = report_path(directory, command, payload)
    if os.path.exists(path):
        logger.info(f"Report {path} already exists, kept")
    else:
        document = dict(payload)
        document[SIDECAR] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "threads": threads,
        }
        with open(path, "w") as handle:
            handle.write(canonical_json(document))
        logger.info(f"Wrote report {path}")

    if suite is not None:
        csv_path = report_path(directory, command, payload, "csv")
        if not os.path.exists(csv_path):
            suite.write_csv(csv_path)
            logger.info(f"Wrote report {csv_path}")
    return path


def read_report(path: str) -> Dict[str, Any]:
    with open(path) as handle:
        return json.load(handle)


def emit(payload: Dict[str, Any], output_format: str, suite: Optional[SuiteReport] = None, stream=None):
    """Prints a payload to standard output: indented JSON, or CSV rows
    (suite rows, else one key,value row per scalar member)."""
    stream = sys.stdout if stream is None else stream
    if output_format == "json":
        stream.write(json.dumps(payload, cls=ReportEncoder, sort_keys=True, indent=2) + "\n")
        return
    writer = csv.writer(stream)
    if suite is not None:
        writer.writerow(CSV_COLUMNS)
        for row in suite.rows:
            writer.writerow([row.case_id, row.check, repr(row.lhs), repr(row.rhs), repr(row.margin),
                             int(row.passed), int(row.hard)])
        return
    writer.writerow(["key", "value"])
    for key, value in sorted(payload.items()):
        if isinstance(value, (str, int, float, bool)) or value is None:
            writer.writerow([key, value])
