"""Command-line runner: baseline policies, JSON-Lines traces, and oracles.

Verbs:

* ``run``      roll a policy (zero / random / grid) for N episodes, write one
               JSON object per step to the trace file plus a summary document.
* ``replay``   re-drive an environment with the raw actions of an existing
               trace file; the rewards and costs reproduce exactly.
* ``oracle``   exhaustively enumerate every action-grid sequence up to a
               budget of 10^7 evaluations and report the best return.
* ``validate`` construct the environment from a config and report dimensions.

Exit codes: 0 success, 2 config error, 3 enumeration budget refusal.

Config documents are JSON. Traces are JSON-Lines with repr-exact floats, so
byte-identical runs produce byte-identical files. The env var
SAFEOR_LOG_LEVEL (error, warn, info, debug) controls logging verbosity.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from orenvs import ENV_REGISTRY, make
from orenvs.core import (
    ConfigError,
    Env,
    EnvError,
    EpisodeTrace,
    run_episode,
)

log = logging.getLogger("orenvs")

#: hard cap on oracle enumerations
ORACLE_BUDGET = 10**7

POLICIES = ("zero", "random", "grid", "replay")
LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


class BudgetExceededError(EnvError):
    """Oracle enumeration would exceed the evaluation budget."""

    def __init__(self, count: int):
        self.count = count
        super().__init__(
            f"enumeration budget exceeded: {count} sequences > {ORACLE_BUDGET}"
        )


@dataclass
class RunSpec:
    """Everything needed to reproduce one run."""

    env: str
    config_path: str
    policy: str
    episodes: int = 1
    out: str | None = None
    seed: int = 0
    grid_levels: int = 2
    trace_path: str | None = None
    horizon: int | None = None

    def __post_init__(self) -> None:
        if self.env not in ENV_REGISTRY:
            known = ", ".join(sorted(ENV_REGISTRY))
            raise ConfigError("env", f"unknown environment {self.env!r}; known: {known}")
        if self.policy not in POLICIES:
            raise ConfigError("policy", f"must be one of {POLICIES}, got {self.policy!r}")
        if self.episodes < 1:
            raise ConfigError("episodes", f"must be >= 1, got {self.episodes}")
        if self.policy == "replay" and not self.trace_path:
            raise ConfigError("trace", "replay policy requires a trace path")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("config", f"{path} must hold a JSON object")
    return doc


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


def grid_points(levels: int) -> np.ndarray:
    """The per-component action grid: evenly spaced over [-1, 1].

    A single level degenerates to the cube midpoint (the zero action) rather
    than an endpoint.
    """
    if levels < 1:
        raise ConfigError("grid_levels", f"must be >= 1, got {levels}")
    if levels == 1:
        return np.zeros(1)
    return np.linspace(-1.0, 1.0, levels)


def _zero_policy(env: Env):
    dim = env.act_dim

    def policy(t: int, obs: np.ndarray) -> np.ndarray:
        return np.zeros(dim)

    return policy


def _random_policy(env: Env, seed: int, episode: int):
    rng = np.random.default_rng(np.random.SeedSequence([seed, episode]))
    dim = env.act_dim

    def policy(t: int, obs: np.ndarray) -> np.ndarray:
        return rng.uniform(-1.0, 1.0, dim)

    return policy


def _grid_policy(env: Env, levels: int):
    """Deterministic sweep through the action grid in lexicographic order."""
    pts = grid_points(levels)
    dim = env.act_dim
    total = len(pts) ** dim

    def policy(t: int, obs: np.ndarray) -> np.ndarray:
        idx = t % total
        a = np.empty(dim)
        for i in range(dim):
            idx, digit = divmod(idx, len(pts))
            a[i] = pts[digit]
        return a

    return policy


def _replay_policy(actions: list[np.ndarray]):
    def policy(t: int, obs: np.ndarray) -> np.ndarray:
        return actions[t]

    return policy


# ---------------------------------------------------------------------------
# Traces and summaries
# ---------------------------------------------------------------------------


def trace_lines(episode: int, trace: EpisodeTrace) -> list[str]:
    lines = []
    for r in trace:
        doc = {
            "episode": episode,
            "t": r.t,
            "action": r.raw_action.tolist(),
            "sanitized_action": r.sanitized_action.tolist(),
            "observation": r.observation.tolist(),
            "reward": r.reward,
            "cost": r.cost,
            "info": {k: float(v) for k, v in r.info.items()},
        }
        lines.append(json.dumps(doc))
    return lines


def read_trace(path: str) -> list[list[dict]]:
    """Parse a JSON-Lines trace back into per-episode step dicts."""
    episodes: dict[int, list[dict]] = {}
    try:
        with open(path) as fh:
            for ln, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    doc = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ConfigError("trace", f"{path}:{ln + 1} is not valid JSON: {exc}")
                episodes.setdefault(int(doc["episode"]), []).append(doc)
    except OSError as exc:
        raise ConfigError("trace", f"cannot read {path}: {exc}")
    if not episodes:
        raise ConfigError("trace", f"{path} holds no step records")
    out = []
    for ep in sorted(episodes):
        steps = sorted(episodes[ep], key=lambda d: d["t"])
        out.append(steps)
    return out


def summarize(env_name: str, traces: list[EpisodeTrace]) -> dict:
    rewards = [t.total_reward for t in traces]
    costs = [t.total_cost for t in traces]
    violations: dict[str, int] = {}
    for trace in traces:
        for r in trace:
            for key, value in r.info.items():
                if key.startswith("cost_"):
                    violations.setdefault(key, 0)
                    if value != 0.0:
                        violations[key] += 1
    n = len(traces)
    r_mean = sum(rewards) / n
    c_mean = sum(costs) / n
    r_std = math.sqrt(sum((x - r_mean) ** 2 for x in rewards) / n)
    c_std = math.sqrt(sum((x - c_mean) ** 2 for x in costs) / n)
    return {
        "env": env_name,
        "episodes": n,
        "reward_mean": r_mean,
        "reward_std": r_std,
        "cost_mean": c_mean,
        "cost_std": c_std,
        "violations": dict(sorted(violations.items())),
    }


def run(spec: RunSpec) -> dict:
    """Execute a RunSpec: roll episodes, write traces + summary, return summary."""
    config = load_config(spec.config_path)
    env = make(spec.env, config)

    replay_actions: list[list[np.ndarray]] = []
    if spec.policy == "replay":
        for steps in read_trace(spec.trace_path):
            replay_actions.append(
                [np.asarray(d["action"], dtype=np.float64) for d in steps]
            )
        episodes = len(replay_actions)
    else:
        episodes = spec.episodes

    traces = []
    for ep in range(episodes):
        if spec.policy == "zero":
            policy = _zero_policy(env)
            horizon = spec.horizon if spec.horizon is not None else env.T
        elif spec.policy == "random":
            policy = _random_policy(env, spec.seed, ep)
            horizon = spec.horizon if spec.horizon is not None else env.T
        elif spec.policy == "grid":
            policy = _grid_policy(env, spec.grid_levels)
            horizon = spec.horizon if spec.horizon is not None else env.T
        else:
            policy = _replay_policy(replay_actions[ep])
            horizon = len(replay_actions[ep])
        trace = run_episode(env, policy, horizon)
        traces.append(trace)
        log.info(
            "episode %d: reward %s cost %s over %d steps",
            ep, trace.total_reward, trace.total_cost, len(trace),
        )

    if spec.out:
        with open(spec.out, "w") as fh:
            for ep, trace in enumerate(traces):
                for line in trace_lines(ep, trace):
                    fh.write(line + "\n")
    summary = summarize(spec.env, traces)
    if spec.out:
        with open(spec.out + ".summary.json", "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    return summary


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------


def oracle_best(
    env: Env, levels: int, horizon: int
) -> tuple[float, list[np.ndarray]]:
    """Best return over every action-grid sequence of the given horizon.

    Evaluates each candidate through the real environment (fresh reset per
    sequence) and returns the maximizing sequence; ties keep the
    lexicographically first level-index sequence. Refuses when the number of
    sequences exceeds the budget.
    """
    if horizon < 0:
        raise ConfigError("horizon", f"must be >= 0, got {horizon}")
    if horizon == 0:
        return 0.0, []
    if horizon > env.T:
        raise ConfigError(
            "horizon", f"exceeds the {env.T}-step episode, got {horizon}"
        )
    pts = grid_points(levels)
    dim = env.act_dim
    count = len(pts) ** (dim * horizon)
    if count > ORACLE_BUDGET:
        raise BudgetExceededError(count)

    best = -math.inf
    best_seq: list[np.ndarray] = []
    for flat in itertools.product(range(len(pts)), repeat=dim * horizon):
        env.reset()
        total = 0.0
        seq = []
        for s in range(horizon):
            a = pts[list(flat[s * dim : (s + 1) * dim])]
            seq.append(a)
            total += env.step(a).reward
        if total > best:
            best = total
            best_seq = seq
    return best, best_seq


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orenvs",
        description="Run, replay, and exhaustively analyze the environments.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--env", required=True, help="environment name")
        p.add_argument("--config", required=True, help="JSON config path")

    p_run = sub.add_parser("run", help="roll a baseline policy")
    common(p_run)
    p_run.add_argument("--policy", default="zero", choices=("zero", "random", "grid"))
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--episodes", type=int, default=1)
    p_run.add_argument("--grid-levels", type=int, default=2)
    p_run.add_argument("--horizon", type=int, default=None)
    p_run.add_argument("--out", default=None, help="JSON-Lines trace path")

    p_replay = sub.add_parser("replay", help="re-drive actions from a trace")
    common(p_replay)
    p_replay.add_argument("trace", help="JSON-Lines trace to replay")
    p_replay.add_argument("--out", default=None)

    p_oracle = sub.add_parser("oracle", help="exhaustive grid search")
    common(p_oracle)
    p_oracle.add_argument("--grid-levels", type=int, default=2)
    p_oracle.add_argument("--horizon", type=int, required=True)
    p_oracle.add_argument("--out", default=None)

    p_val = sub.add_parser("validate", help="check a config document")
    common(p_val)

    return parser


def _setup_logging() -> None:
    raw = os.environ.get("SAFEOR_LOG_LEVEL", "warn")
    level = LOG_LEVELS.get(raw.lower())
    if level is None:
        raise ConfigError(
            "SAFEOR_LOG_LEVEL",
            f"must be one of {sorted(LOG_LEVELS)}, got {raw!r}",
        )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        _setup_logging()
        if args.verb == "run":
            spec = RunSpec(
                env=args.env,
                config_path=args.config,
                policy=args.policy,
                episodes=args.episodes,
                out=args.out,
                seed=args.seed,
                grid_levels=args.grid_levels,
                horizon=args.horizon,
            )
            summary = run(spec)
            print(json.dumps(summary, indent=2))
        elif args.verb == "replay":
            spec = RunSpec(
                env=args.env,
                config_path=args.config,
                policy="replay",
                out=args.out,
                trace_path=args.trace,
            )
            summary = run(spec)
            print(json.dumps(summary, indent=2))
        elif args.verb == "oracle":
            config = load_config(args.config)
            env = make(args.env, config)
            value, seq = oracle_best(env, args.grid_levels, args.horizon)
            doc = {
                "env": args.env,
                "grid_levels": args.grid_levels,
                "horizon": args.horizon,
                "best_return": value,
                "argmax": [a.tolist() for a in seq],
            }
            if args.out:
                with open(args.out, "w") as fh:
                    json.dump(doc, fh, indent=2)
                    fh.write("\n")
            print(json.dumps(doc, indent=2))
        else:  # validate
            config = load_config(args.config)
            env = make(args.env, config)
            print(
                json.dumps(
                    {
                        "env": args.env,
                        "ok": True,
                        "act_dim": env.act_dim,
                        "obs_dim": env.obs_dim,
                        "horizon": env.T,
                    },
                    indent=2,
                )
            )
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
