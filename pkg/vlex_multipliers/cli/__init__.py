from vlex_multipliers.cli.ExperimentConfig import ExperimentConfig, ExperimentKeys
from vlex_multipliers.cli.commands import (
    CommandResult,
    cmd_norm,
    cmd_mulnorm,
    cmd_approximate,
    cmd_replay,
    cmd_suite,
    cmd_oracle
)
from vlex_multipliers.cli.reports import content_hash, write_report, emit

__all__ = [
    "ExperimentConfig", "ExperimentKeys", "CommandResult", "cmd_norm",
    "cmd_mulnorm", "cmd_approximate", "cmd_replay", "cmd_suite", "cmd_oracle",
    "content_hash", "write_report", "emit",
]
