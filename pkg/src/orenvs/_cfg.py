"""Tiny config readers shared by every environment parser.

Each helper raises ConfigError with the dotted field path stated by the
caller, so CLI validation can point at the offending entry.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from .core import ConfigError

__all__ = ["join", "req_bool", "req_int", "req_list", "req_num", "req_series", "req_str"]


def join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def req_str(entry: dict, key: str, path: str = "") -> str:
    full = join(path, key)
    value = entry.get(key)
    if not isinstance(value, str) or not value:
        raise ConfigError(full, "must be a non-empty string")
    return value


def req_num(
    entry: dict,
    key: str,
    path: str = "",
    minimum: float | None = None,
    maximum: float | None = None,
    default: float | None = None,
) -> float:
    full = join(path, key)
    value = entry.get(key, default)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(full, f"must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(full, "must be finite")
    if minimum is not None and value < minimum:
        raise ConfigError(full, f"must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(full, f"must be <= {maximum}, got {value}")
    return value


def req_int(
    entry: dict,
    key: str,
    path: str = "",
    minimum: int | None = None,
    default: int | None = None,
) -> int:
    full = join(path, key)
    value = entry.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(full, f"must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(full, f"must be >= {minimum}, got {value}")
    return value


def req_bool(entry: dict, key: str, path: str = "", default: bool | None = None) -> bool:
    full = join(path, key)
    value = entry.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(full, f"must be true or false, got {value!r}")
    return value


def req_list(entry: dict, key: str, path: str = "", min_len: int = 1) -> list:
    full = join(path, key)
    value = entry.get(key)
    if not isinstance(value, list) or len(value) < min_len:
        raise ConfigError(full, f"must be a list with >= {min_len} entries")
    return value


def req_series(
    entry: dict, key: str, path: str = "", min_len: int = 0
) -> np.ndarray:
    """Read a 1-D numeric series as float64."""
    full = join(path, key)
    value = entry.get(key)
    if not isinstance(value, (list, tuple)):
        raise ConfigError(full, "must be a numeric list")
    for i, x in enumerate(value):
        if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
            raise ConfigError(f"{full}[{i}]", f"must be a finite number, got {x!r}")
    if len(value) < min_len:
        raise ConfigError(full, f"needs >= {min_len} entries, got {len(value)}")
    return np.asarray(value, dtype=np.float64)
