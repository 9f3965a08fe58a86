"""Battery fleet operation on a DC network with scheduled line outages.

Each step the agent picks generator outputs, battery charge and discharge
rates, deliberate load shedding, and voltage angles at every non-reference
bus (bus 1 is pinned to 0 rad). Line flows follow the DC approximation
f = B * (theta_i - theta_j), forced to exactly 0 on lines the outage
schedule de-energizes that hour. Battery energy follows a bucket rule
E' = gamma * E + eta * c - p_d / eta, clipped to its physical range.

Slack generation is computed, never controlled: each bus receives
s = max(0, d - shed - gen + c - p_d + inflow - outflow), evaluated with
the flow terms exactly as written, and the nodal residual
Delta = (gen + s - d + shed - c + p_d) + inflow - outflow prices any
mismatch between injections and the network equations at phi_bal per MW.
A consequence of the slack sign convention is that imports raise the
computed slack, so only locally balanced buses with zero transfers reach
a zero balance penalty.

Reward is the negative of generator fuel cost (a polynomial in output,
coefficients lowest-order first, the constant term always charged), plus
linear slack and shed charges. Cost aggregates the action-bound clip
penalties (reachable only when raw values bypass the action-cube clamp)
and the observation-bound penalties: state of charge against its physical
range (deviation measured normalized by E_max), normalized angle
differences and flow ratios f / fmax against [-1, 1], and slack against
[0, s_max]. Reward and the residual use pre-clip dynamics values; the
clipped values are what the observation reports, and clipped energy
persists as the stored state.

Observation layout: [SOC per bus (E / E_max, 0 for buses without a
battery) | normalized angle differences per line | flow ratios per line |
slack per bus | demand windows (buses x k) | tau], with
tau = t / (T - 1) taken literally (the terminal observation overshoots 1;
for T = 1 tau degenerates to t).
"""

from __future__ import annotations

import numpy as np

from ._cfg import req_int, req_list, req_num, req_series, req_str
from .core import (
    ConfigError,
    DimensionMismatchError,
    Env,
    ForecastWindow,
    clip_box,
    decode_box,
    window,
)

__all__ = ["GridStorageEnv"]

PHI_KEYS = (
    "bal",
    "power",
    "charge",
    "discharge",
    "slack",
    "shed",
    "soc",
    "theta",
    "theta_act",
    "flow_ratio",
)


class GridStorageEnv(Env):
    name = "grid_storage"

    def __init__(self, config: dict):
        super().__init__(req_int(config, "horizon", minimum=1))
        self.k = req_int(config, "window", minimum=1)
        self.s_max = req_num(config, "s_max", minimum=0.0)
        self.theta_max = req_num(config, "theta_max")
        if self.theta_max <= 0:
            raise ConfigError("theta_max", "must be > 0")

        phi = config.get("penalties")
        if not isinstance(phi, dict):
            raise ConfigError("penalties", "must be a table of penalty factors")
        self.phi = {
            key: req_num(phi, key, "penalties", minimum=0.0) for key in PHI_KEYS
        }
        costs = config.get("costs")
        if not isinstance(costs, dict):
            raise ConfigError("costs", "must hold k_slack and k_ls")
        self.k_slack = req_num(costs, "k_slack", "costs", minimum=0.0)
        self.k_ls = req_num(costs, "k_ls", "costs", minimum=0.0)

        self.buses = list(req_list(config, "buses"))
        for i, name in enumerate(self.buses):
            if not isinstance(name, str) or not name:
                raise ConfigError(f"buses[{i}]", "must be a nonempty string")
        if len(set(self.buses)) != len(self.buses):
            raise ConfigError("buses", "duplicate bus name")
        self._bus_idx = {name: i for i, name in enumerate(self.buses)}
        self.N = len(self.buses)

        self._parse_generators(config)
        self._parse_lines(config)
        self._parse_batteries(config)
        self._parse_demand(config)
        self._parse_schedule(config)

        # block-wise action bounds: [p | c | p_d | shed | theta(2..N)]
        ones = np.ones(max(self.N - 1, 0))
        self._a_lo = np.concatenate(
            [self.p_lo, self.c_lo, self.d_lo, np.zeros(self.N),
             -self.theta_max * ones]
        )
        self._a_hi = np.concatenate(
            [self.p_hi, self.c_hi, self.d_hi,
             np.full(self.N, self.d_max_global), self.theta_max * ones]
        )

    def _parse_generators(self, config: dict) -> None:
        self.gen_bus: list[int] = []
        p_lo, p_hi = [], []
        self.coeffs: list[np.ndarray] = []
        for i, entry in enumerate(req_list(config, "generators")):
            path = f"generators[{i}]"
            bus = req_str(entry, "bus", path)
            if bus not in self._bus_idx:
                raise ConfigError(path, f"unknown bus {bus!r}")
            lo = req_num(entry, "p_min", path)
            hi = req_num(entry, "p_max", path)
            if lo > hi:
                raise ConfigError(path, "p_min > p_max")
            self.gen_bus.append(self._bus_idx[bus])
            p_lo.append(lo)
            p_hi.append(hi)
            if "coeffs" in entry:
                self.coeffs.append(req_series(entry, "coeffs", path, min_len=1))
            else:
                self.coeffs.append(np.zeros(1))
        self.G = len(self.gen_bus)
        self.p_lo = np.array(p_lo)
        self.p_hi = np.array(p_hi)

    def _parse_lines(self, config: dict) -> None:
        entries = req_list(config, "lines", min_len=0) if "lines" in config else []
        li_from, li_to, b, fmax, th_lo, th_hi = [], [], [], [], [], []
        for i, entry in enumerate(entries):
            path = f"lines[{i}]"
            frm = req_str(entry, "from", path)
            to = req_str(entry, "to", path)
            for name in (frm, to):
                if name not in self._bus_idx:
                    raise ConfigError(path, f"unknown bus {name!r}")
            if frm == to:
                raise ConfigError(path, "line endpoints must differ")
            cap = req_num(entry, "fmax", path)
            if cap <= 0:
                raise ConfigError(f"{path}.fmax", "must be > 0")
            lo = req_num(entry, "theta_min", path)
            hi = req_num(entry, "theta_max", path)
            if lo >= hi:
                raise ConfigError(path, "theta_min must be < theta_max")
            li_from.append(self._bus_idx[frm])
            li_to.append(self._bus_idx[to])
            b.append(req_num(entry, "b", path))
            fmax.append(cap)
            th_lo.append(lo)
            th_hi.append(hi)
        self.L = len(li_from)
        self.li_from = np.array(li_from, dtype=int)
        self.li_to = np.array(li_to, dtype=int)
        self.b = np.array(b)
        self.fmax = np.array(fmax)
        self.th_lo = np.array(th_lo)
        self.th_hi = np.array(th_hi)

    def _parse_batteries(self, config: dict) -> None:
        n = self.N
        self.e_min = np.zeros(n)
        self.e_max = np.zeros(n)
        self.e0 = np.zeros(n)
        self.c_lo = np.zeros(n)
        self.c_hi = np.zeros(n)
        self.d_lo = np.zeros(n)
        self.d_hi = np.zeros(n)
        self.eta = np.ones(n)
        self.gamma = np.ones(n)
        entries = (
            req_list(config, "batteries", min_len=0)
            if "batteries" in config
            else []
        )
        seen: set[int] = set()
        for i, entry in enumerate(entries):
            path = f"batteries[{i}]"
            bus = req_str(entry, "bus", path)
            if bus not in self._bus_idx:
                raise ConfigError(path, f"unknown bus {bus!r}")
            bi = self._bus_idx[bus]
            if bi in seen:
                raise ConfigError(path, f"duplicate battery at bus {bus!r}")
            seen.add(bi)
            e_min = req_num(entry, "e_min", path, minimum=0.0, default=0.0)
            e_max = req_num(entry, "e_max", path)
            if e_max <= 0 or e_min > e_max:
                raise ConfigError(path, "needs 0 <= e_min <= e_max with e_max > 0")
            self.e_min[bi] = e_min
            self.e_max[bi] = e_max
            self.e0[bi] = req_num(
                entry, "e0", path, minimum=e_min, maximum=e_max, default=e_min
            )
            self.c_lo[bi] = req_num(entry, "c_min", path, minimum=0.0, default=0.0)
            self.c_hi[bi] = req_num(
                entry, "c_max", path, minimum=self.c_lo[bi], default=self.c_lo[bi]
            )
            self.d_lo[bi] = req_num(entry, "d_min", path, minimum=0.0, default=0.0)
            self.d_hi[bi] = req_num(
                entry, "d_max", path, minimum=self.d_lo[bi], default=self.d_lo[bi]
            )
            for key, target in (("eta", self.eta), ("gamma", self.gamma)):
                value = req_num(entry, key, path, maximum=1.0, default=1.0)
                if value <= 0:
                    raise ConfigError(f"{path}.{key}", "must be in (0, 1]")
                target[bi] = value

    def _parse_demand(self, config: dict) -> None:
        table = config.get("demand")
        if not isinstance(table, dict):
            raise ConfigError("demand", "must map bus name to a series")
        self._fw: list[ForecastWindow] = []
        peak = 0.0
        for name in self.buses:
            if name not in table:
                raise ConfigError("demand", f"missing series for bus {name!r}")
            series = req_series(table, name, "demand", min_len=self.T)
            if np.any(series < 0):
                raise ConfigError(f"demand.{name}", "must be >= 0")
            peak = max(peak, float(series[: self.T].max()))
            self._fw.append(
                ForecastWindow(series=series, length=self.k, horizon=self.T)
            )
        extra = set(table) - set(self.buses)
        if extra:
            raise ConfigError("demand", f"unknown buses {sorted(extra)}")
        self.d_max_global = peak

    def _parse_schedule(self, config: dict) -> None:
        self._deener = np.zeros((self.T, self.L), dtype=bool)
        table = config.get("deenergized", {})
        if not isinstance(table, dict):
            raise ConfigError("deenergized", "must map time step to line indices")
        for key, ids in table.items():
            path = f"deenergized[{key!r}]"
            try:
                t = int(key)
            except (TypeError, ValueError):
                raise ConfigError(path, "time key must be an integer") from None
            if not 0 <= t < self.T:
                raise ConfigError(path, f"time {t} outside [0, {self.T})")
            if not isinstance(ids, (list, tuple)):
                raise ConfigError(path, "must be a list of line indices")
            for raw in ids:
                if not isinstance(raw, int) or isinstance(raw, bool):
                    raise ConfigError(path, f"line index {raw!r} must be an integer")
                if not 0 <= raw < self.L:
                    raise ConfigError(path, f"line index {raw} outside [0, {self.L})")
                if self._deener[t, raw]:
                    raise ConfigError(path, f"line {raw} listed twice")
                self._deener[t, raw] = True

    # -- dimensions ---------------------------------------------------------

    @property
    def act_dim(self) -> int:
        return self.G + 3 * self.N + (self.N - 1)

    @property
    def obs_dim(self) -> int:
        return 2 * self.N + 2 * self.L + self.N * self.k + 1

    # -- operations ---------------------------------------------------------

    def decode(self, a_norm: np.ndarray):
        """Split a raw action into (p, c, p_d, shed, theta, penalty).

        Decoding is block-wise affine onto the physical bounds with exact
        endpoints. The penalty charges each block's factor times the
        physical distance a raw out-of-cube component would overshoot its
        bound; inside the cube it is exactly zero. theta comes back as a
        full per-bus vector with the reference bus pinned to 0.
        """
        a = np.asarray(a_norm, dtype=np.float64)
        if a.shape != (self.act_dim,):
            raise DimensionMismatchError(
                f"expected action of length {self.act_dim}, got shape {a.shape}"
            )
        decoded = decode_box(a, self._a_lo, self._a_hi)
        span = self._a_hi - self._a_lo
        excess = (
            np.maximum(a - 1.0, 0.0) + np.maximum(-1.0 - a, 0.0)
        ) / 2.0 * span
        g, n = self.G, self.N
        cut = np.cumsum([g, n, n, n])
        penalty = (
            self.phi["power"] * excess[: cut[0]].sum()
            + self.phi["charge"] * excess[cut[0] : cut[1]].sum()
            + self.phi["discharge"] * excess[cut[1] : cut[2]].sum()
            + self.phi["shed"] * excess[cut[2] : cut[3]].sum()
            + self.phi["theta_act"] * excess[cut[3] :].sum()
        )
        theta = np.zeros(n)
        theta[1:] = decoded[cut[3] :]
        return (
            decoded[: cut[0]],
            decoded[cut[0] : cut[1]],
            decoded[cut[1] : cut[2]],
            decoded[cut[2] : cut[3]],
            theta,
            float(penalty),
        )

    # -- env hooks ----------------------------------------------------------

    def _reset(self) -> np.ndarray:
        self._e = self.e0.copy()
        # flat start: all angles 0, no flows, no slack
        encode0 = np.zeros(self.L)
        if self.L:
            encode0 = -(self.th_lo + self.th_hi) / (self.th_hi - self.th_lo)
            encode0 = np.clip(encode0, -1.0, 1.0)
        self._theta_obs = encode0
        self._ratio = np.zeros(self.L)
        self._slack = np.zeros(self.N)
        return self._observe(0)

    def _tau(self, t: int) -> float:
        if self.T == 1:
            return float(t)
        return t / (self.T - 1)

    def _soc(self) -> np.ndarray:
        return np.divide(
            self._e, self.e_max, out=np.zeros(self.N), where=self.e_max > 0
        )

    def _observe(self, t: int) -> np.ndarray:
        parts = [self._soc(), self._theta_obs, self._ratio, self._slack]
        for fw in self._fw:
            parts.append(window(fw, t))
        parts.append(np.array([self._tau(t)]))
        return np.concatenate(parts)

    def _step(self, a_norm: np.ndarray):
        t = self._t
        p, c, pd, shed, theta, cost_action = self.decode(a_norm)

        # bucket energy update, clipped to the physical range; the deviation
        # is priced in normalized (per-E_max) units
        e_pre = self.gamma * self._e + self.eta * c - pd / self.eta
        self._e, e_ex = clip_box(e_pre, self.e_min, self.e_max)
        soc_ex = np.divide(
            e_ex, self.e_max, out=np.zeros(self.N), where=self.e_max > 0
        )
        cost_soc = self.phi["soc"] * soc_ex.sum()

        delta_th = theta[self.li_from] - theta[self.li_to]
        energized = ~self._deener[t]
        f = np.where(energized, self.b * delta_th, 0.0)

        d_t = np.array([fw.series[t] for fw in self._fw])
        gen_sum = np.zeros(self.N)
        np.add.at(gen_sum, self.gen_bus, p)
        inflow = np.zeros(self.N)
        np.add.at(inflow, self.li_to, f)
        outflow = np.zeros(self.N)
        np.add.at(outflow, self.li_from, f)

        slack = np.maximum(0.0, d_t - shed - gen_sum + c - pd + inflow - outflow)
        inj = gen_sum + slack - d_t + shed - c + pd
        residual = inj + inflow - outflow
        cost_balance = self.phi["bal"] * np.abs(residual).sum()

        fuel = 0.0
        for gi in range(self.G):
            fuel += sum(
                coef * p[gi] ** j for j, coef in enumerate(self.coeffs[gi])
            )
        reward = -fuel - self.k_slack * slack.sum() - self.k_ls * shed.sum()

        # observation-bound clipping on the reported state
        big_theta = np.zeros(self.L)
        cost_theta = 0.0
        if self.L:
            raw = (2.0 * delta_th - (self.th_lo + self.th_hi)) / (
                self.th_hi - self.th_lo
            )
            big_theta, ex = clip_box(raw, -1.0, 1.0)
            cost_theta = self.phi["theta"] * ex.sum()
        ratio = np.zeros(self.L)
        cost_flow_ratio = 0.0
        if self.L:
            ratio, ex = clip_box(f / self.fmax, -1.0, 1.0)
            cost_flow_ratio = self.phi["flow_ratio"] * ex.sum()
        s_obs, ex = clip_box(slack, 0.0, self.s_max)
        cost_slack = self.phi["slack"] * ex.sum()

        self._theta_obs = big_theta
        self._ratio = ratio
        self._slack = s_obs

        info = {
            "cost_action": cost_action,
            "cost_soc": float(cost_soc),
            "cost_theta": float(cost_theta),
            "cost_flow_ratio": float(cost_flow_ratio),
            "cost_slack": float(cost_slack),
            "cost_balance": float(cost_balance),
            "sanitized_action": np.concatenate([p, c, pd, shed, theta[1:]]),
        }
        return self._observe(t + 1), reward, info
