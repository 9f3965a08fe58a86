"""Flat-array handle API for driving orenvs environments from foreign callers.

The surface is five functions — :func:`make`, :func:`reset`, :func:`step`,
:func:`spec`, :func:`close` — shaped the way a foreign-function boundary
wants them:

- configs cross as JSON strings, never as host objects;
- observations and actions cross as 1-D C-contiguous float64 buffers;
- the per-step info map carries string -> double pairs only;
- environments are addressed by opaque integer handles.

Numbers pass through without re-rounding: the values returned here are the
exact float64 values produced by the underlying environment. A handle stays
valid until :func:`close`; its dimensions never change over its lifetime.
One handle must not be stepped concurrently, but distinct handles may be
driven from distinct threads.

All failures raise subclasses of :class:`BindingError`.
"""

from __future__ import annotations

import itertools
import json
import threading

import numpy as np

from orenvs import make as _construct
from orenvs.core import (
    ConfigError,
    DimensionMismatchError,
    EpisodeFinishedError,
    InvalidActionError,
)

__all__ = [
    "BindingError",
    "ConfigurationError",
    "InvalidHandleError",
    "DimensionError",
    "ActionValueError",
    "EpisodeOverError",
    "make",
    "reset",
    "step",
    "spec",
    "close",
]


class BindingError(Exception):
    """Base class for every error raised across this boundary."""


class ConfigurationError(BindingError):
    """Unknown environment name, malformed JSON, or invalid config contents."""


class InvalidHandleError(BindingError):
    """The handle does not refer to a live (unclosed) environment."""


class DimensionError(BindingError):
    """An action buffer has the wrong shape or length."""


class ActionValueError(BindingError):
    """An action buffer contains values the environment rejects (NaN/inf)."""


class EpisodeOverError(BindingError):
    """The handle's episode already terminated; call reset before stepping."""


class _Live:
    __slots__ = ("env", "name")

    def __init__(self, env, name: str):
        self.env = env
        self.name = name


_registry: dict[int, _Live] = {}
_registry_lock = threading.Lock()
_next_id = itertools.count(1)


def _lookup(handle) -> _Live:
    with _registry_lock:
        live = _registry.get(handle)
    if live is None:
        raise InvalidHandleError(f"{handle!r} is not a live environment handle")
    return live


def make(env_name: str, config_json: str) -> int:
    """Build an environment from a JSON config string; return its handle."""
    if not isinstance(env_name, str):
        raise ConfigurationError(f"env name must be a string, got {type(env_name).__name__}")
    if not isinstance(config_json, str):
        raise ConfigurationError(
            f"config must cross the boundary as a JSON string, got {type(config_json).__name__}"
        )
    try:
        config = json.loads(config_json)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ConfigurationError(
            f"config JSON must encode an object, got {type(config).__name__}"
        )
    try:
        env = _construct(env_name, config)
    except ConfigError as exc:
        raise ConfigurationError(str(exc)) from None
    handle = next(_next_id)
    with _registry_lock:
        _registry[handle] = _Live(env, env_name)
    return handle


def reset(handle: int) -> np.ndarray:
    """Restart the handle's episode; return the initial observation buffer."""
    live = _lookup(handle)
    return np.ascontiguousarray(live.env.reset(), dtype=np.float64)


def step(
    handle: int, a_norm
) -> tuple[np.ndarray, float, float, bool, bool, dict[str, float]]:
    """Apply one action buffer; return (obs, reward, cost, terminated, truncated, info).

    The info map holds the scalar cost components and diagnostics only; the
    sanitized action is an array and therefore does not cross this boundary.
    """
    live = _lookup(handle)
    try:
        a = np.ascontiguousarray(a_norm, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DimensionError(f"action is not a float64 buffer: {exc}") from None
    if a.ndim != 1 or a.shape[0] != live.env.act_dim:
        raise DimensionError(
            f"action buffer must have length {live.env.act_dim}, got shape {a.shape}"
        )
    try:
        out = live.env.step(a)
    except EpisodeFinishedError as exc:
        raise EpisodeOverError(str(exc)) from None
    except DimensionMismatchError as exc:
        raise DimensionError(str(exc)) from None
    except InvalidActionError as exc:
        raise ActionValueError(str(exc)) from None
    info = {
        k: float(v) for k, v in out.info.items() if k != "sanitized_action"
    }
    return (
        np.ascontiguousarray(out.observation, dtype=np.float64),
        float(out.reward),
        float(out.cost),
        bool(out.terminated),
        bool(out.truncated),
        info,
    )


def spec(handle: int) -> dict:
    """Describe the handle: name, dimensions, horizon, and action bounds."""
    live = _lookup(handle)
    env = live.env
    return {
        "env": live.name,
        "act_dim": int(env.act_dim),
        "obs_dim": int(env.obs_dim),
        "horizon": int(env.T),
        "act_lo": np.full(env.act_dim, -1.0),
        "act_hi": np.full(env.act_dim, 1.0),
    }


def close(handle: int) -> None:
    """Invalidate the handle; every later call on it raises InvalidHandleError."""
    with _registry_lock:
        live = _registry.pop(handle, None)
    if live is None:
        raise InvalidHandleError(f"{handle!r} is not a live environment handle")
