# src/utils/file_logger.py

import json
import os
from datetime import datetime
from pathlib import Path

TRAINING_LOG_FILE_NAME = "training.log"
CLI_LOG_FILE_PATH = "data/logs/cli_calls.log"


def _timestamp() -> str:
    return datetime.now().strftime("%Y-%m-%d %H:%M:%S")


def _append(log_file_path: str | Path, log_entry: str) -> None:
    with open(log_file_path, "a") as log_file:
        log_file.write(log_entry)


def log_to_file(
    log_file_path: str | Path,
    message: str | None = None,
    variables: dict | None = None,
):
    """
    Appends a timestamped block with a message and/or named values.

    Args:
        log_file_path (str | Path): The path to the log file.
        message (str, optional): The message to log. Defaults to None.
        variables (dict, optional): Names and values to log, one per line. Floats
            are written with full precision. Defaults to None.
    """
    log_entry = f"[{_timestamp()}]\n"

    if message:
        log_entry += f"Message: {message}\n"

    if variables:
        for variable_name, variable_value in variables.items():
            if isinstance(variable_value, float):
                variable_value = repr(variable_value)
            log_entry += f"{variable_name}: {variable_value}\n"

    _append(log_file_path, log_entry + "\n")


def log_command_call(log_file_path: str | Path, command: str, /, **arguments):
    """
    Logs a command-line invocation with the arguments it was given.
    Unset (None) arguments are left out.
    """
    log_entry = f"Command: {command}\n"
    for name, value in arguments.items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = " ".join(str(item) for item in value)
        log_entry += f"  {name}: {value}\n"
    log_to_file(log_file_path, log_entry)


def log_variable(log_file_path: str | Path, variable_name: str, variable_value):
    log_to_file(log_file_path, variables={variable_name: variable_value})


def log_epoch(log_file_path: str | Path, epoch: int, metrics: dict):
    """One block per training epoch; a None metric (no validation set) is written as '-'."""
    values = {name: "-" if value is None else value for name, value in metrics.items()}
    log_to_file(log_file_path, message=f"epoch {epoch}", variables=values)


def initialize_log_file(log_file_path: str | Path, title: str = "Log File Initialized"):
    """
    Creates the log file (and its directory) if it doesn't exist, starting it
    with a title line. An existing file is appended to.

    Args:
        log_file_path (str | Path): The path to the log file.
        title (str): First line of a new file.
    """
    directory = os.path.dirname(str(log_file_path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    if not os.path.exists(log_file_path):
        with open(log_file_path, "w") as log_file:
            log_file.write(f"{title} ({_timestamp()})\n\n")


def log_config(log_file_path: str | Path, name: str, config: dict):
    """
    Logs a configuration snapshot as pretty-printed JSON with sorted keys.

    Args:
        log_file_path (str | Path): The path to the log file.
        name (str): Label of the snapshot, e.g. "train_config".
        config (dict): JSON-serialisable settings.
    """
    log_entry = f"[{_timestamp()}]\n"
    log_entry += f"Config: {name}\n"
    log_entry += json.dumps(config, indent=2, sort_keys=True, default=str)
    _append(log_file_path, log_entry + "\n\n")
