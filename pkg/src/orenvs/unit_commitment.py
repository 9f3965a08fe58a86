"""Unit commitment with on/off repair, ramp repair, and DC power flow.

Two variants share the class:

* ``v0``: single bus, no lines, no voltage angles; action is [u | p].
* ``v1``: networked DC flow; action is [u | p | theta_2..N] with bus 1 the
  angle reference (theta_1 = 0).

Commitment actions are thresholded at 0 (a > 0 means on) and repaired against
minimum up/down times using start/stop event windows of length UT and DT.
Power is decoded into [P_min, P_max], repaired against ramp limits, then
multiplied by the repaired status. Line flows f = B * (theta_from - theta_to)
are clipped into [F_min, F_max] for all downstream use; angles themselves are
not repaired. Load shed and per-generator spinning reserve are computed, not
controlled.

Observation layout:
    [ per-generator status history u_seq (max(UT, DT) + 1 entries each) |
      power p (G) | angles theta (N, v1 only) |
      per-bus demand window (N x W, bus-major) ]

Cost components: cost_utdt (penalty P per repaired commitment), cost_ramp
(P times total ramp excess), cost_cap (P times total transmission excess,
identically 0 in v0). Reward is the negative of generation cost (charged for
committed units only), startup and shutdown costs, load-shed cost, and
reserve-shortfall cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._cfg import req_int, req_list, req_num, req_series, req_str
from .core import ConfigError, Env, ForecastWindow, decode_box, window

__all__ = ["UnitCommitmentEnv"]


@dataclass(frozen=True)
class _Generator:
    name: str
    a: float
    b: float
    c: float
    c_v: float
    c_w: float
    ut: int
    dt: int
    ru: float
    rd: float
    su: float
    sd: float
    p_min: float
    p_max: float
    bus: int
    u0_seq: tuple[int, ...]
    p0: float


@dataclass(frozen=True)
class _Line:
    from_bus: int
    to_bus: int
    b: float
    f_min: float
    f_max: float


class UnitCommitmentEnv(Env):
    name = "uc"

    def __init__(self, config: dict):
        horizon = req_int(config, "horizon", minimum=1)
        super().__init__(horizon)
        self.variant = config.get("variant", "v0")
        if self.variant not in ("v0", "v1"):
            raise ConfigError("variant", f"must be 'v0' or 'v1', got {self.variant!r}")
        self.P = req_num(config, "penalty", minimum=0.0)
        self.c_ls = req_num(config, "C_LS", minimum=0.0)
        self.c_r = req_num(config, "C_R", minimum=0.0)
        self.reserve = req_num(config, "reserve", minimum=0.0)
        self.W = req_int(config, "window", minimum=1)

        self._parse_buses(config)
        self._parse_generators(config)
        self._parse_lines(config)
        self._parse_demand(config)

    # -- config ---------------------------------------------------------------

    def _parse_buses(self, config: dict) -> None:
        raw = req_list(config, "buses")
        self._bus_idx: dict[str, int] = {}
        self.theta_lo = np.zeros(len(raw))
        self.theta_hi = np.zeros(len(raw))
        for i, entry in enumerate(raw):
            path = f"buses[{i}]"
            name = req_str(entry, "name", path)
            if name in self._bus_idx:
                raise ConfigError(f"{path}.name", f"duplicate bus {name!r}")
            self._bus_idx[name] = i
            if self.variant == "v1":
                self.theta_lo[i] = req_num(entry, "theta_min", path=path)
                self.theta_hi[i] = req_num(entry, "theta_max", path=path)
                if self.theta_lo[i] > self.theta_hi[i]:
                    raise ConfigError(path, "theta_min > theta_max")
        self.n_bus = len(raw)
        if self.variant == "v0" and self.n_bus != 1:
            raise ConfigError("buses", f"v0 needs exactly one bus, got {self.n_bus}")

    def _parse_generators(self, config: dict) -> None:
        raw = req_list(config, "generators")
        self.generators: list[_Generator] = []
        for i, entry in enumerate(raw):
            path = f"generators[{i}]"
            ut = req_int(entry, "UT", path=path, minimum=1)
            dt = req_int(entry, "DT", path=path, minimum=1)
            p_min = req_num(entry, "p_min", path=path)
            p_max = req_num(entry, "p_max", path=path)
            if p_min > p_max:
                raise ConfigError(path, "p_min > p_max")
            bus_name = entry.get("bus")
            if self.n_bus == 1 and bus_name is None:
                bus = 0
            else:
                if bus_name not in self._bus_idx:
                    raise ConfigError(f"{path}.bus", f"unknown bus {bus_name!r}")
                bus = self._bus_idx[bus_name]
            seq_len = max(ut, dt) + 1
            u0 = entry.get("u0_seq")
            if u0 is None:
                u0 = [0] * seq_len
            if not isinstance(u0, list) or len(u0) != seq_len:
                raise ConfigError(
                    f"{path}.u0_seq", f"needs exactly max(UT, DT)+1 = {seq_len} entries"
                )
            if any(v not in (0, 1) for v in u0):
                raise ConfigError(f"{path}.u0_seq", "entries must be 0 or 1")
            self.generators.append(
                _Generator(
                    name=req_str(entry, "name", path),
                    a=req_num(entry, "a", path=path, default=0.0),
                    b=req_num(entry, "b", path=path, default=0.0),
                    c=req_num(entry, "c", path=path, default=0.0),
                    c_v=req_num(entry, "C_v", path=path, default=0.0),
                    c_w=req_num(entry, "C_w", path=path, default=0.0),
                    ut=ut,
                    dt=dt,
                    ru=req_num(entry, "RU", path=path, minimum=0.0),
                    rd=req_num(entry, "RD", path=path, minimum=0.0),
                    su=req_num(entry, "SU", path=path, minimum=0.0),
                    sd=req_num(entry, "SD", path=path, minimum=0.0),
                    p_min=p_min,
                    p_max=p_max,
                    bus=bus,
                    u0_seq=tuple(int(v) for v in u0),
                    p0=req_num(entry, "p0", path=path, default=0.0),
                )
            )
        self.G = len(self.generators)
        self._p_lo = np.array([g.p_min for g in self.generators])
        self._p_hi = np.array([g.p_max for g in self.generators])

    def _parse_lines(self, config: dict) -> None:
        raw = config.get("lines", [])
        if self.variant == "v0" and raw:
            raise ConfigError("lines", "v0 is a single-bus system without lines")
        self.lines: list[_Line] = []
        for i, entry in enumerate(raw):
            path = f"lines[{i}]"
            frm = req_str(entry, "from", path)
            to = req_str(entry, "to", path)
            for b in (frm, to):
                if b not in self._bus_idx:
                    raise ConfigError(path, f"unknown bus {b!r}")
            f_min = req_num(entry, "f_min", path=path)
            f_max = req_num(entry, "f_max", path=path)
            if f_min > f_max:
                raise ConfigError(path, "f_min > f_max")
            self.lines.append(
                _Line(
                    from_bus=self._bus_idx[frm],
                    to_bus=self._bus_idx[to],
                    b=req_num(entry, "B", path=path),
                    f_min=f_min,
                    f_max=f_max,
                )
            )

    def _parse_demand(self, config: dict) -> None:
        demand = config.get("demand")
        if not isinstance(demand, dict):
            raise ConfigError("demand", "must map bus name to a demand series")
        self._demand: list[ForecastWindow] = []
        for name, idx in sorted(self._bus_idx.items(), key=lambda kv: kv[1]):
            if name not in demand:
                raise ConfigError(f"demand.{name}", "missing demand series for bus")
            series = req_series(demand, name, "demand", min_len=1)
            self._demand.append(
                ForecastWindow(series=series, length=self.W, horizon=self.T)
            )

    # -- dimensions -------------------------------------------------------------

    @property
    def act_dim(self) -> int:
        n = 2 * self.G
        if self.variant == "v1":
            n += self.n_bus - 1
        return n

    @property
    def obs_dim(self) -> int:
        n = sum(len(g.u0_seq) for g in self.generators) + self.G
        if self.variant == "v1":
            n += self.n_bus
        return n + self.n_bus * self.W

    # -- state ------------------------------------------------------------------

    def _reset(self) -> np.ndarray:
        self._u_seq = [list(g.u0_seq) for g in self.generators]
        self._p = np.array([g.p0 for g in self.generators])
        self._theta = np.zeros(self.n_bus)
        return self._observe(0)

    def _observe(self, t: int) -> np.ndarray:
        parts = [np.asarray(seq, dtype=np.float64) for seq in self._u_seq]
        parts.append(self._p)
        if self.variant == "v1":
            parts.append(self._theta)
        for fw in self._demand:
            parts.append(window(fw, t))
        return np.concatenate(parts)

    def _demand_now(self, t: int) -> np.ndarray:
        out = np.zeros(self.n_bus)
        for n, fw in enumerate(self._demand):
            if t < fw.series.shape[0]:
                out[n] = fw.series[t]
        return out

    # -- repairs (exposed for direct testing) -------------------------------------

    def repair_commitment(
        self, u_next: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Force min up/down compliance; returns (u_repaired, violation flags)."""
        u_rep = np.array(u_next, dtype=np.float64)
        viol = np.zeros(self.G)
        for i, g in enumerate(self.generators):
            seq = self._u_seq[i]
            # start/stop events are adjacent differences of the status history;
            # the window covers the candidate plus the last UT-1 (DT-1) events
            v_sum = max(0.0, u_next[i] - seq[0]) + sum(
                max(0, seq[j] - seq[j + 1]) for j in range(g.ut - 1)
            )
            w_sum = max(0.0, seq[0] - u_next[i]) + sum(
                max(0, seq[j + 1] - seq[j]) for j in range(g.dt - 1)
            )
            if v_sum > u_next[i]:
                u_rep[i] = 1.0
                viol[i] = 1.0
            elif w_sum > 1.0 - u_next[i]:
                u_rep[i] = 0.0
                viol[i] = 1.0
        return u_rep, viol

    def repair_power(
        self,
        p_next: np.ndarray,
        u_rep: np.ndarray,
        v_rep: np.ndarray,
        w_rep: np.ndarray,
    ) -> tuple[np.ndarray, float]:
        """Clip requested power to ramp caps/floors; returns (p, total excess)."""
        u_prev = np.array([seq[0] for seq in self._u_seq], dtype=np.float64)
        p_rep = np.array(p_next, dtype=np.float64)
        excess = 0.0
        for i, g in enumerate(self.generators):
            up_room = g.ru * u_prev[i] + g.su * v_rep[i]
            down_room = g.rd * u_rep[i] + g.sd * w_rep[i]
            up_viol = p_next[i] - self._p[i] - up_room
            down_viol = self._p[i] - p_next[i] - down_room
            if up_viol > 0:
                p_rep[i] = self._p[i] + up_room
            elif down_viol > 0:
                p_rep[i] = self._p[i] - down_room
            excess += max(up_viol, down_viol, 0.0)
        return p_rep * u_rep, excess

    # -- dynamics -----------------------------------------------------------------

    def _step(self, a_norm: np.ndarray):
        t = self._t
        u_next = (a_norm[: self.G] > 0.0).astype(np.float64)
        p_next = decode_box(a_norm[self.G : 2 * self.G], self._p_lo, self._p_hi)

        u_prev = np.array([seq[0] for seq in self._u_seq], dtype=np.float64)
        u_rep, viol = self.repair_commitment(u_next)
        v_rep = np.maximum(0.0, u_rep - u_prev)
        w_rep = np.maximum(0.0, u_prev - u_rep)
        p_new, ramp_excess = self.repair_power(p_next, u_rep, v_rep, w_rep)

        if self.variant == "v1":
            theta = np.zeros(self.n_bus)
            theta[1:] = decode_box(
                a_norm[2 * self.G :], self.theta_lo[1:], self.theta_hi[1:]
            )
        else:
            theta = np.zeros(self.n_bus)

        cap_excess = 0.0
        flow = np.zeros(len(self.lines))
        for k, ln in enumerate(self.lines):
            f_raw = ln.b * (theta[ln.from_bus] - theta[ln.to_bus])
            cap_excess += max(f_raw - ln.f_max, ln.f_min - f_raw, 0.0)
            flow[k] = min(max(f_raw, ln.f_min), ln.f_max)

        demand = self._demand_now(t)
        shed = np.zeros(self.n_bus)
        for n in range(self.n_bus):
            balance = demand[n]
            for i, g in enumerate(self.generators):
                if g.bus == n:
                    balance -= p_new[i]
            for k, ln in enumerate(self.lines):
                if ln.to_bus == n:
                    balance -= flow[k]  # inflow
                if ln.from_bus == n:
                    balance += flow[k]  # outflow
            shed[n] = max(balance, 0.0)

        reserve = 0.0
        for i, g in enumerate(self.generators):
            head = g.p_max * u_rep[i] - p_new[i]
            ramp_cap = g.ru * u_prev[i] + g.su * v_rep[i]
            reserve += max(min(head, ramp_cap), 0.0)
        shortfall = max(self.reserve - reserve, 0.0)

        gen_cost = 0.0
        for i, g in enumerate(self.generators):
            if u_rep[i] == 1.0:  # offline units incur no cost, including c
                gen_cost += g.a * p_new[i] ** 2 + g.b * p_new[i] + g.c
        start_cost = sum(
            g.c_v * v_rep[i] for i, g in enumerate(self.generators)
        )
        stop_cost = sum(
            g.c_w * w_rep[i] for i, g in enumerate(self.generators)
        )
        reward = (
            -gen_cost
            - start_cost
            - stop_cost
            - self.c_ls * shed.sum()
            - self.c_r * shortfall
        )

        # persist repaired statuses; raw (pre-repair) requests never enter the
        # history, otherwise phantom starts would poison later repairs
        for i in range(self.G):
            self._u_seq[i] = [int(u_rep[i])] + self._u_seq[i][:-1]
        self._p = p_new
        self._theta = theta

        sanitized = np.concatenate([u_rep, p_new, theta[1:]]) \
            if self.variant == "v1" else np.concatenate([u_rep, p_new])
        info = {
            "cost_utdt": self.P * float(viol.sum()),
            "cost_ramp": self.P * float(ramp_excess),
            "cost_cap": self.P * float(cap_excess),
            "shed": float(shed.sum()),
            "reserve_shortfall": float(shortfall),
            "sanitized_action": sanitized,
        }
        return self._observe(t + 1), reward, info
