#!/usr/bin/python

import csv
import json
import logging
from collections.abc import Callable, Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from typing import Any, TypeVar

import numpy as np
import ruamel.yaml

yaml = ruamel.yaml.YAML(typ="safe")

TOOL_VERSION = "0.1.0"

# Exit codes shared by every command
EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

# Top-level sections of a --config file
CONFIG_SECTIONS = ("solver", "nonparametric", "detector")

T = TypeVar("T")
R = TypeVar("R")


class InputError(ValueError):
    """Raised when an argument, file, or configuration value is invalid."""


class ImageFormatError(InputError):
    """Raised when an image file is not a supported grayscale format."""


class NumericalError(ArithmeticError):
    """Raised when an optimization produces non-finite values."""

    def __init__(self, message: str, trace: Iterable[float] = ()) -> None:
        super().__init__(message)
        self.trace = [float(value) for value in trace]


def configure_logging(verbose: bool = False) -> None:
    """Configure the root logger for command-line use."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


def load_config(path: str) -> dict[str, Any] | None:
    """Loads a configuration mapping in yaml or json format."""
    config = None

    if path.endswith((".yaml", ".yml")):
        try:
            # try to read it as yaml
            with open(path, "rb") as f:
                config = yaml.load(f)
        except Exception as err:
            print(f"{path}: yaml parsing error: {err}")
    elif path.endswith(".json"):
        try:
            # try to read it as json
            with open(path, "rb") as f:
                config = json.load(f)
        except Exception as err:
            print(f"{path}: json parsing error: {err}")
    else:
        print(f"{path}: unsupported configuration format (use .yaml or .json)")

    if config is not None and not isinstance(config, dict):
        print(f"{path}: top level must be a mapping, not {type(config).__name__}")
        config = None

    return config


def check_known_keys(
    mapping: Mapping[str, Any], known_keys: Iterable[str], section: str
) -> None:
    """Raise InputError naming the first key not in known_keys."""
    known = set(known_keys)
    for key in mapping:
        if key not in known:
            raise InputError(
                f"{section}: unknown key '{key}' (expected one of {sorted(known)})"
            )


def parse_grid(text: str) -> list[float]:
    """Parse an inclusive 'start:step:stop' range or a comma-separated list."""
    text = text.strip()
    if not text:
        raise InputError("empty grid")
    try:
        if ":" not in text:
            return [float(item) for item in text.split(",") if item.strip()]
        parts = [float(item) for item in text.split(":")]
    except ValueError as err:
        raise InputError(f"invalid grid '{text}': {err}") from err
    if len(parts) != 3:
        raise InputError(f"invalid grid '{text}': expected start:step:stop")
    start, step, stop = parts
    if step <= 0 or stop < start:
        raise InputError(f"invalid grid '{text}': need step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    # rounding keeps 0.1 + k*0.01 from drifting off the printed decimals
    return [round(start + k * step, 10) for k in range(count)]


def parse_float_list(text: str) -> list[float]:
    """Parse a comma-separated list of floats."""
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as err:
        raise InputError(f"invalid number list '{text}': {err}") from err
    if not values:
        raise InputError("empty number list")
    return values


def parallel_map(
    func: Callable[[T], R], items: Iterable[T], workers: int | None = None
) -> list[R]:
    """Apply func to every item, returning results in input order."""
    items = list(items)
    if workers is not None and workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def to_jsonable(value: Any) -> Any:
    """Convert numpy containers and scalars into plain JSON types."""
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Mapping):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def dump_json(data: Any) -> str:
    """Serialize data deterministically."""
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n"


def write_json(path: str, data: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dump_json(data))


def read_json(path: str) -> Any:
    try:
        with open(path, "rb") as f:
            return json.load(f)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: json parsing error: {err}") from err


def write_csv(path: str, header: list[str], rows: Iterable[Iterable[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([to_jsonable(item) for item in row])


def provenance(command: str, arguments: Mapping[str, Any]) -> dict[str, Any]:
    """Build the provenance block attached to every report."""
    return {
        "arguments": {key: to_jsonable(value) for key, value in arguments.items()},
        "command": command,
        "tool_version": TOOL_VERSION,
    }


def report_error(label: str | None, err: BaseException) -> int:
    """Print a diagnostic for err and return the matching exit code."""
    message = str(err)
    if label and not message.startswith(f"{label}:"):
        message = f"{label}: {message}"
    print(message)
    if isinstance(err, NumericalError):
        return EXIT_NUMERICAL_ERROR
    return EXIT_INPUT_ERROR


def config_section(config: Mapping[str, Any] | None, name: str) -> dict[str, Any]:
    """Return a copy of one section of a loaded configuration."""
    section = (config or {}).get(name) or {}
    if not isinstance(section, Mapping):
        raise InputError(f"configuration section '{name}' must be a mapping")
    return dict(section)


def explicit(**values: Any) -> dict[str, Any]:
    """Keep only the command-line values that were actually given."""
    return {key: value for key, value in values.items() if value is not None}


def read_config(path: str | None) -> dict[str, Any]:
    """Load the optional --config file of an estimation command."""
    if not path:
        return {}
    config = load_config(path)
    if config is None:
        raise InputError(f"{path}: configuration could not be loaded")
    check_known_keys(config, CONFIG_SECTIONS, path)
    return config
