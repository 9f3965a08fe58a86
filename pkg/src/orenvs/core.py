"""Environment-agnostic CMDP kernel.

Every environment in this package follows the same contract:

* actions arrive as flat float64 vectors in the normalized cube [-1, 1]^n
  (values outside the cube are clamped to it, without penalty, before any
  decoding);
* each step returns a :class:`StepOutcome` whose ``cost`` is the exact sum of
  the ``cost_*`` entries in ``info``;
* episodes terminate exactly at t == T and are never truncated;
* two runs with identical config and identical raw action sequences produce
  bit-identical traces.

This module holds the shared primitives: bounds, affine action decoding,
clip-with-penalty, zero-padded forecast windows, the Env base class, and the
episode runner.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "Bounds",
    "ConfigError",
    "DimensionMismatchError",
    "Env",
    "EnvError",
    "EpisodeFinishedError",
    "EpisodeTrace",
    "ForecastWindow",
    "InvalidActionError",
    "StepOutcome",
    "StepRecord",
    "affine_decode",
    "clip_box",
    "clip_with_penalty",
    "decode_box",
    "run_episode",
    "window",
]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class EnvError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(EnvError):
    """A config document failed validation.

    ``path`` is a dotted/indexed field path such as ``generators[2].RU``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class InvalidActionError(EnvError):
    """Action contained non-finite entries."""


class DimensionMismatchError(InvalidActionError):
    """Action vector has the wrong length."""


class EpisodeFinishedError(EnvError):
    """step() was called after the episode terminated."""


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bounds:
    """A closed interval [lo, hi] with finite endpoints."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"bounds must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"bounds reversed: lo={self.lo} > hi={self.hi}")

    @property
    def span(self) -> float:
        return self.hi - self.lo


@dataclass
class StepOutcome:
    """Result of one environment step.

    ``info`` maps snake_case component names to scalar floats. Entries whose
    key starts with ``cost_`` are the per-constraint cost components and sum
    exactly to ``cost``; other entries are diagnostics (revenue, shed, ...).
    The reserved key ``sanitized_action`` holds the post-repair action vector.
    ``truncated`` is always False: episodes run to t == T even under
    constraint violations.
    """

    observation: np.ndarray
    reward: float
    cost: float
    terminated: bool
    truncated: bool
    info: dict[str, Any]


@dataclass(frozen=True)
class ForecastWindow:
    """Fixed-width read head over a known series, zero-padded past the end.

    ``horizon`` bounds the read offset; when None the series length is the
    limit. Reads never fail inside the limit, they pad with exact zeros.
    """

    series: np.ndarray
    length: int
    horizon: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "series", np.asarray(self.series, dtype=np.float64).reshape(-1)
        )
        if self.length < 0:
            raise ValueError(f"window length must be >= 0, got {self.length}")


def window(fw: ForecastWindow, t: int) -> np.ndarray:
    """Return series[t .. t+length-1] with zero padding past the series end."""
    limit = fw.horizon if fw.horizon is not None else fw.series.shape[0]
    if t < 0 or t > limit:
        raise IndexError(f"window offset {t} outside [0, {limit}]")
    out = np.zeros(fw.length, dtype=np.float64)
    avail = fw.series[t : t + fw.length]
    out[: avail.shape[0]] = avail
    return out


# ---------------------------------------------------------------------------
# Action decoding primitives
# ---------------------------------------------------------------------------


def affine_decode(a_norm: float, b: Bounds) -> float:
    """Map a normalized action component from [-1, 1] onto [b.lo, b.hi].

    Out-of-cube inputs are clamped to the cube first. The endpoints are exact:
    -1 maps to lo and +1 maps to hi bit-for-bit, which the raw IEEE evaluation
    of ((a+1)/2)*(hi-lo)+lo does not always achieve.
    """
    if not math.isfinite(a_norm):
        raise InvalidActionError(f"non-finite action component {a_norm!r}")
    a = min(max(a_norm, -1.0), 1.0)
    if a == -1.0:
        return b.lo
    if a == 1.0:
        return b.hi
    x = ((a + 1.0) / 2.0) * (b.hi - b.lo) + b.lo
    # interior results stay inside the box even under rounding
    return min(max(x, b.lo), b.hi)


def decode_box(a_norm: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized affine_decode over per-component bounds."""
    a = np.clip(np.asarray(a_norm, dtype=np.float64), -1.0, 1.0)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    x = ((a + 1.0) / 2.0) * (hi - lo) + lo
    x = np.minimum(np.maximum(x, lo), hi)
    x = np.where(a == -1.0, lo, x)
    x = np.where(a == 1.0, hi, x)
    return x


def clip_with_penalty(x: float, b: Bounds, phi: float) -> tuple[float, float]:
    """Project x onto [b.lo, b.hi]; penalty is phi times the distance moved.

    penalty = phi * max(b.lo - x, x - b.hi, 0), zero exactly when x is already
    inside the bounds.
    """
    if phi < 0:
        raise ValueError(f"penalty factor must be >= 0, got {phi}")
    excess = max(b.lo - x, x - b.hi, 0.0)
    return min(max(x, b.lo), b.hi), phi * excess


def clip_box(
    x: np.ndarray, lo: np.ndarray, hi: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized projection onto [lo, hi]; also returns per-component excess."""
    x = np.asarray(x, dtype=np.float64)
    excess = np.maximum(np.maximum(lo - x, x - hi), 0.0)
    return np.minimum(np.maximum(x, lo), hi), excess


# ---------------------------------------------------------------------------
# Environment base class
# ---------------------------------------------------------------------------


class Env(ABC):
    """Deterministic CMDP environment over the normalized action cube.

    Subclasses implement ``_reset`` and ``_step``. ``_step`` receives the
    cube-clamped action and returns (observation, reward, info); the base
    class derives cost as the exact sum of the ``cost_*`` info entries,
    advances time, and sets the termination flag at t == T.
    """

    #: registry name, set by each subclass
    name: str = ""

    def __init__(self, horizon: int):
        if horizon < 1:
            raise ConfigError("horizon", f"must be >= 1, got {horizon}")
        self.T = int(horizon)
        self._t = 0
        self._started = False

    # -- dimensions -------------------------------------------------------

    @property
    @abstractmethod
    def act_dim(self) -> int: ...

    @property
    @abstractmethod
    def obs_dim(self) -> int: ...

    # -- subclass hooks ----------------------------------------------------

    @abstractmethod
    def _reset(self) -> np.ndarray:
        """Rebuild all state from config; return the initial observation."""

    @abstractmethod
    def _step(
        self, a_norm: np.ndarray
    ) -> tuple[np.ndarray, float, dict[str, Any]]:
        """Advance one period. self._t is the current (pre-step) time."""

    # -- public API ---------------------------------------------------------

    @property
    def t(self) -> int:
        return self._t

    @property
    def terminated(self) -> bool:
        return self._t >= self.T

    def reset(self) -> np.ndarray:
        self._t = 0
        self._started = True
        obs = self._reset()
        return np.asarray(obs, dtype=np.float64)

    def step(self, a_raw: Sequence[float] | np.ndarray) -> StepOutcome:
        if not self._started:
            self.reset()
        if self._t >= self.T:
            raise EpisodeFinishedError(f"episode ended at t={self.T}")
        a = np.asarray(a_raw, dtype=np.float64)
        if a.ndim != 1 or a.shape[0] != self.act_dim:
            raise DimensionMismatchError(
                f"expected action of length {self.act_dim}, got shape {a.shape}"
            )
        if not np.all(np.isfinite(a)):
            raise InvalidActionError("action contains non-finite entries")
        a = np.clip(a, -1.0, 1.0)  # out-of-cube raw actions clamp without penalty
        obs, reward, info = self._step(a)
        self._t += 1
        cost = 0.0
        for key, value in info.items():
            if key.startswith("cost_"):
                cost += value
        return StepOutcome(
            observation=np.asarray(obs, dtype=np.float64),
            reward=float(reward),
            cost=float(cost),
            terminated=self._t >= self.T,
            truncated=False,
            info=info,
        )


# ---------------------------------------------------------------------------
# Episode runner
# ---------------------------------------------------------------------------

#: a policy maps (t, observation) to a raw action vector
Policy = Callable[[int, np.ndarray], Sequence[float]]


@dataclass
class StepRecord:
    t: int
    raw_action: np.ndarray
    sanitized_action: np.ndarray
    observation: np.ndarray
    reward: float
    cost: float
    info: dict[str, float]


@dataclass
class EpisodeTrace:
    records: list[StepRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[StepRecord]:
        return iter(self.records)

    @property
    def total_reward(self) -> float:
        return sum(r.reward for r in self.records)

    @property
    def total_cost(self) -> float:
        return sum(r.cost for r in self.records)

    def raw_actions(self) -> list[np.ndarray]:
        return [r.raw_action for r in self.records]


def run_episode(env: Env, policy: Policy, horizon: int) -> EpisodeTrace:
    """Drive env with policy for at most horizon steps.

    horizon 0 returns an empty trace without touching the env. Otherwise the
    env is reset first; the loop stops early if the env terminates.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    trace = EpisodeTrace()
    if horizon == 0:
        return trace
    obs = env.reset()
    for t in range(horizon):
        raw = np.asarray(policy(t, obs), dtype=np.float64)
        if raw.ndim != 1 or raw.shape[0] != env.act_dim:
            raise DimensionMismatchError(
                f"policy emitted action of shape {raw.shape}, "
                f"expected length {env.act_dim}"
            )
        outcome = env.step(raw)
        info = dict(outcome.info)
        sanitized = np.asarray(
            info.pop("sanitized_action", raw), dtype=np.float64
        )
        trace.records.append(
            StepRecord(
                t=t,
                raw_action=raw.copy(),
                sanitized_action=sanitized,
                observation=outcome.observation,
                reward=outcome.reward,
                cost=outcome.cost,
                info=info,
            )
        )
        obs = outcome.observation
        if outcome.terminated:
            break
    return trace
