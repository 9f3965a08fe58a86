"""Deterministic constrained-MDP environments for operations research.

Every environment shares one contract: actions arrive as float vectors in
[-1, 1]^act_dim, observations leave as float vectors, and each step reports a
scalar reward plus a nonnegative-by-construction breakdown of constraint
costs in ``info`` (keys starting with ``cost_``).  Construction is pure
config-dict -> instance; all randomness an environment uses is seeded through
its config, so identical configs and action sequences replay bit-identically.

``make(name, config)`` builds any registered environment by name.
"""

from orenvs.core import (
    Bounds,
    ConfigError,
    DimensionMismatchError,
    Env,
    EnvError,
    EpisodeFinishedError,
    EpisodeTrace,
    ForecastWindow,
    InvalidActionError,
    StepOutcome,
    StepRecord,
    clip_box,
    decode_box,
    window,
)

from orenvs.asu import AsuEnv
from orenvs.batch_sched import BatchSchedEnv
from orenvs.blending import BlendingEnv
from orenvs.grid_storage import GridStorageEnv
from orenvs.gtep import GtepEnv
from orenvs.inv_mgmt import InvMgmtEnv
from orenvs.sched_maint import SchedMaintEnv
from orenvs.unit_commitment import UnitCommitmentEnv


def _rtn(config: dict) -> BatchSchedEnv:
    return BatchSchedEnv(config, mode="rtn")


def _stn(config: dict) -> BatchSchedEnv:
    return BatchSchedEnv(config, mode="stn")


ENV_REGISTRY = {
    "rtn": _rtn,
    "stn": _stn,
    "uc": UnitCommitmentEnv,
    "gtep": GtepEnv,
    "blending": BlendingEnv,
    "inv_mgmt": InvMgmtEnv,
    "grid_storage": GridStorageEnv,
    "sched_maint": SchedMaintEnv,
    "asu": AsuEnv,
}


def make(name: str, config: dict) -> Env:
    """Construct a registered environment from a validated config dict."""
    try:
        factory = ENV_REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(ENV_REGISTRY))
        raise ConfigError("env", f"unknown environment {name!r}; known: {known}")
    return factory(config)


__all__ = [
    "AsuEnv",
    "BatchSchedEnv",
    "BlendingEnv",
    "Bounds",
    "ConfigError",
    "DimensionMismatchError",
    "ENV_REGISTRY",
    "Env",
    "EnvError",
    "EpisodeFinishedError",
    "EpisodeTrace",
    "ForecastWindow",
    "GridStorageEnv",
    "GtepEnv",
    "InvalidActionError",
    "InvMgmtEnv",
    "SchedMaintEnv",
    "StepOutcome",
    "StepRecord",
    "UnitCommitmentEnv",
    "clip_box",
    "decode_box",
    "make",
    "window",
]
