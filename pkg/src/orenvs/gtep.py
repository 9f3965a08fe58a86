"""Multi-period generation and transmission expansion planning.

Each step the agent adds generator units per (type, region) and pushes power
over candidate transmission lines. Generator additions are decoded into
[0, M], rounded half-away-from-zero, and capped so counts never exceed M;
the pre-repair overshoot is charged an L0/L2 penalty. Flows are decoded into
[-Cap, Cap] and zeroed when |P| <= eps; a nonzero flow on an uninstalled
line installs it (installation cost charged once) and carries power in the
same step.

Regional available power follows the model equation

    avail_r = sum_i n_{i,r} * Cap_i + sum_{(r,r') in L} P - sum_{(r',r) in L} P

so a positive flow on line (r1, r2) credits r1 and debits r2; shipping power
from r1 to r2 therefore takes a negative P on that line (the reverse
direction is the negation). Unmet demand is charged the L0/L2 penalty per
region. Reward is the negative installation spend; counts are cumulative,
nothing retires.

Observation layout: [counts n (type-major, G x R) | line indicators (L,
with_lines only) | per-region demand window (R x k) | current time index].
With with_lines = false the flow entries vanish from both action and
observation and availability is generation only.
"""

from __future__ import annotations

import math

import numpy as np

from ._cfg import req_bool, req_int, req_list, req_num, req_series, req_str
from .core import ConfigError, Env, ForecastWindow, decode_box, window

__all__ = ["GtepEnv"]


def _round_half_up(x: float) -> float:
    # "nearest integer" with .5 ties rounding up, on nonnegative inputs
    return math.floor(x + 0.5)


class GtepEnv(Env):
    name = "gtep"

    def __init__(self, config: dict):
        super().__init__(req_int(config, "horizon", minimum=1))
        self.lam0 = req_num(config, "lambda0", minimum=0.0)
        self.lam2 = req_num(config, "lambda2", minimum=0.0)
        self.eps = req_num(config, "eps", default=1e-6)
        if self.eps <= 0:
            raise ConfigError("eps", "must be > 0")
        self.k = req_int(config, "window", minimum=1)
        self.with_lines = req_bool(config, "with_lines", default=True)

        regions = req_list(config, "regions")
        self.regions: list[str] = []
        for i, name in enumerate(regions):
            if not isinstance(name, str) or not name:
                raise ConfigError(f"regions[{i}]", "must be a nonempty string")
            if name in self.regions:
                raise ConfigError(f"regions[{i}]", f"duplicate region {name!r}")
            self.regions.append(name)
        self.R = len(self.regions)
        ridx = {name: r for r, name in enumerate(self.regions)}

        types = req_list(config, "gen_types")
        self.G = len(types)
        self.cap_gen = np.zeros(self.G)
        self.inst_gen = np.zeros(self.G)
        self.M = np.zeros((self.G, self.R))
        self._n0 = np.zeros((self.G, self.R))
        self.type_names: list[str] = []
        for i, entry in enumerate(types):
            path = f"gen_types[{i}]"
            self.type_names.append(req_str(entry, "name", path))
            self.cap_gen[i] = req_num(entry, "cap", path=path, minimum=0.0)
            self.inst_gen[i] = req_num(entry, "inst_cost", path=path, minimum=0.0)
            self.M[i] = self._per_region(entry, "max_count", path, ridx)
            self._n0[i] = self._per_region(entry, "n0", path, ridx, default=0)
            for r in range(self.R):
                if self._n0[i, r] > self.M[i, r]:
                    raise ConfigError(f"{path}.n0", "initial count exceeds max_count")

        self._parse_lines(config, ridx)
        self._parse_demand(config)

    def _per_region(
        self, entry: dict, key: str, path: str, ridx: dict, default=None
    ) -> np.ndarray:
        value = entry.get(key, default)
        out = np.zeros(self.R)
        if isinstance(value, int) and not isinstance(value, bool):
            if value < 0:
                raise ConfigError(f"{path}.{key}", "must be >= 0")
            out[:] = value
            return out
        if isinstance(value, dict):
            for name, count in value.items():
                if name not in ridx:
                    raise ConfigError(f"{path}.{key}", f"unknown region {name!r}")
                if not isinstance(count, int) or isinstance(count, bool) or count < 0:
                    raise ConfigError(f"{path}.{key}.{name}", "must be an integer >= 0")
                out[ridx[name]] = count
            missing = set(ridx) - set(value)
            if key == "max_count" and missing:
                raise ConfigError(f"{path}.{key}", f"missing regions {sorted(missing)}")
            return out
        raise ConfigError(f"{path}.{key}", "must be an integer or a region map")

    def _parse_lines(self, config: dict, ridx: dict) -> None:
        raw = config.get("lines", []) if self.with_lines else []
        self.line_from: list[int] = []
        self.line_to: list[int] = []
        self.cap_tl = np.zeros(len(raw))
        self.inst_tl = np.zeros(len(raw))
        self._nt0 = np.zeros(len(raw))
        seen: set[frozenset] = set()
        for i, entry in enumerate(raw):
            path = f"lines[{i}]"
            frm = req_str(entry, "from", path)
            to = req_str(entry, "to", path)
            for name in (frm, to):
                if name not in ridx:
                    raise ConfigError(path, f"unknown region {name!r}")
            if frm == to:
                raise ConfigError(path, "line endpoints must differ")
            pair = frozenset((frm, to))
            if pair in seen:
                raise ConfigError(path, f"pair {sorted(pair)} appears twice")
            seen.add(pair)
            self.line_from.append(ridx[frm])
            self.line_to.append(ridx[to])
            self.cap_tl[i] = req_num(entry, "cap", path=path, minimum=0.0)
            self.inst_tl[i] = req_num(entry, "inst_cost", path=path, minimum=0.0)
            if req_bool(entry, "installed", path=path, default=False):
                self._nt0[i] = 1.0
        self.L = len(self.line_from)

    def _parse_demand(self, config: dict) -> None:
        demand = config.get("demand")
        if not isinstance(demand, dict):
            raise ConfigError("demand", "must map region name to a demand series")
        self._demand: list[ForecastWindow] = []
        for name in self.regions:
            if name not in demand:
                raise ConfigError(f"demand.{name}", "missing demand series for region")
            series = req_series(demand, name, "demand", min_len=1)
            self._demand.append(ForecastWindow(series=series, length=self.k, horizon=self.T))

    # -- dimensions -------------------------------------------------------------

    @property
    def act_dim(self) -> int:
        return self.G * self.R + self.L

    @property
    def obs_dim(self) -> int:
        return self.G * self.R + self.L + self.R * self.k + 1

    # -- state ------------------------------------------------------------------

    def _reset(self) -> np.ndarray:
        self._n = self._n0.copy()
        self._nt = self._nt0.copy()
        return self._observe(0)

    def _observe(self, t: int) -> np.ndarray:
        parts = [self._n.ravel(), self._nt]
        for fw in self._demand:
            parts.append(window(fw, t))
        parts.append(np.array([float(t)]))
        return np.concatenate(parts)

    def _demand_at(self, t: int) -> np.ndarray:
        out = np.zeros(self.R)
        for r, fw in enumerate(self._demand):
            if t < fw.series.shape[0]:
                out[r] = fw.series[t]
        return out

    # -- dynamics -----------------------------------------------------------------

    def _step(self, a_norm: np.ndarray):
        t = self._t
        gr = self.G * self.R
        add_raw = decode_box(
            a_norm[:gr], np.zeros(gr), self.M.ravel()
        ).reshape(self.G, self.R)
        p = decode_box(a_norm[gr:], -self.cap_tl, self.cap_tl)
        p = np.where(np.abs(p) <= self.eps, 0.0, p)

        cost_bound = 0.0
        n_add = np.zeros((self.G, self.R))
        for i in range(self.G):
            for r in range(self.R):
                prebound = _round_half_up(add_raw[i, r])
                over = self._n[i, r] + prebound - self.M[i, r]
                if over > 0:
                    n_add[i, r] = self.M[i, r] - self._n[i, r]
                    cost_bound += self.lam0 + self.lam2 * over**2
                else:
                    n_add[i, r] = prebound
        self._n += n_add

        new_lines = 0
        tl_spend = 0.0
        for l in range(self.L):
            if self._nt[l] == 0.0 and abs(p[l]) > 0.0:
                self._nt[l] = 1.0
                new_lines += 1
                tl_spend += self.inst_tl[l]

        avail = self._n.T @ self.cap_gen  # per region
        for l in range(self.L):
            avail[self.line_from[l]] += p[l]
            avail[self.line_to[l]] -= p[l]

        demand = self._demand_at(t)
        cost_demand = 0.0
        for r in range(self.R):
            if demand[r] > avail[r]:
                cost_demand += self.lam0 + self.lam2 * (demand[r] - avail[r]) ** 2

        reward = -float(n_add.sum(axis=1) @ self.inst_gen) - tl_spend
        info = {
            "cost_bound_gen": cost_bound,
            "cost_demand": cost_demand,
            "new_lines": float(new_lines),
            "sanitized_action": np.concatenate([n_add.ravel(), p]),
        }
        return self._observe(t + 1), reward, info
