"""Batch process scheduling over a resource/state network.

One kernel serves two environments:

* ``rtn`` mode: one action component per task; dispatching a task consumes
  every equipment unit the task lists, jointly.
* ``stn`` mode: one action component per eligible (task, equipment) pair;
  each pair runs independently on its single unit.

With unique task-to-equipment mappings the two modes coincide exactly.

Observation layout (fixed width for the whole episode):
    [ inventory X_r for every resource (config order) |
      pending buffer, row-major, tau_max rows x pendable resources |
      demand window, row-major, T rows x products ]

Action components decode to batch sizes in [V_min, V_max]; a component with
|a_norm| <= eps requests no dispatch. Sanitization limits batches to the
material headroom above each consumed resource's lower bound, zeroes batches
below V_min or lacking equipment, and charges the total deviation as cost.

Cost components per step: cost_lb / cost_ub (inventory bound indicator
counts), cost_eq (dispatches on sub-unit equipment), cost_sanit
(lambda_sanit-weighted deviation). Reward: revenue from demand served out of
post-enforcement stock, minus unmet-demand penalty at 1.5x price, minus
reactant ordering cost for below-zero dips, minus utility cost per batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._cfg import req_int, req_num, req_str
from .core import ConfigError, Env, ForecastWindow, decode_box, window

__all__ = ["BatchSchedEnv"]

MATERIAL_CLASSES = ("reactant", "intermediate", "product")
CLASSES = MATERIAL_CLASSES + ("equipment",)


@dataclass(frozen=True)
class _Resource:
    name: str
    cls: str
    x0: float
    x_min: float
    x_max: float
    price: float  # products
    cost: float  # reactants


@dataclass(frozen=True)
class _Task:
    name: str
    tau: int
    nu: dict[int, float]  # resource index -> stoichiometric coefficient
    equipment: tuple[int, ...]
    utilities: tuple[str, ...]
    v_min: float
    v_max: float
    pair_bounds: dict[int, tuple[float, float]]  # equipment idx -> (lo, hi)


@dataclass(frozen=True)
class _Dispatch:
    """One action component: a task dispatched on a fixed equipment set."""

    task: int
    equipment: tuple[int, ...]
    v_min: float
    v_max: float


class BatchSchedEnv(Env):
    name = "stn"

    def __init__(self, config: dict, mode: str = "stn"):
        if mode not in ("rtn", "stn"):
            raise ConfigError("mode", f"must be 'rtn' or 'stn', got {mode!r}")
        self.mode = mode
        self.name = mode
        horizon = req_int(config, "horizon", minimum=1)
        super().__init__(horizon)
        self.lambda_sanit = req_num(config, "lambda_sanit", minimum=0.0)
        self.eps = float(config.get("eps", 1e-3))
        if self.eps <= 0:
            raise ConfigError("eps", f"must be > 0, got {self.eps}")

        self._parse_resources(config)
        self._parse_tasks(config)
        self._build_dispatches()
        self._parse_series(config)

        self.tau_max = max((t.tau for t in self.tasks), default=1)
        # pendable: any resource some task produces, plus all used equipment
        pend = set()
        for task in self.tasks:
            for r, coeff in task.nu.items():
                if coeff > 0:
                    pend.add(r)
            pend.update(task.equipment)
        self.pend_idx = sorted(pend)
        self._pend_col = {r: c for c, r in enumerate(self.pend_idx)}

    # -- config parsing -----------------------------------------------------

    def _parse_resources(self, config: dict) -> None:
        raw = config.get("resources")
        if not isinstance(raw, list) or not raw:
            raise ConfigError("resources", "must be a non-empty list")
        self.resources: list[_Resource] = []
        self._r_idx: dict[str, int] = {}
        for i, entry in enumerate(raw):
            path = f"resources[{i}]"
            name = req_str(entry, "name", path)
            if name in self._r_idx:
                raise ConfigError(f"{path}.name", f"duplicate resource {name!r}")
            cls = req_str(entry, "class", path)
            if cls not in CLASSES:
                raise ConfigError(f"{path}.class", f"unknown class {cls!r}")
            x0 = req_num(entry, "x0", path=path)
            x_min = req_num(entry, "x_min", path=path)
            x_max = req_num(entry, "x_max", path=path)
            if not (x_min <= x0 <= x_max):
                raise ConfigError(
                    path, f"need x_min <= x0 <= x_max, got {x_min}, {x0}, {x_max}"
                )
            self._r_idx[name] = i
            self.resources.append(
                _Resource(
                    name=name,
                    cls=cls,
                    x0=x0,
                    x_min=x_min,
                    x_max=x_max,
                    price=float(entry.get("price", 0.0)),
                    cost=float(entry.get("cost", 0.0)),
                )
            )
        self.x0 = np.array([r.x0 for r in self.resources])
        self.x_min = np.array([r.x_min for r in self.resources])
        self.x_max = np.array([r.x_max for r in self.resources])
        self.prod_idx = [i for i, r in enumerate(self.resources) if r.cls == "product"]
        self.react_idx = [i for i, r in enumerate(self.resources) if r.cls == "reactant"]
        self.bound_lb_idx = [
            i for i, r in enumerate(self.resources)
            if r.cls in ("intermediate", "product")
        ]
        self.equip_idx = [i for i, r in enumerate(self.resources) if r.cls == "equipment"]

    def _parse_tasks(self, config: dict) -> None:
        raw = config.get("tasks")
        if not isinstance(raw, list) or not raw:
            raise ConfigError("tasks", "must be a non-empty list")
        self.tasks: list[_Task] = []
        for i, entry in enumerate(raw):
            path = f"tasks[{i}]"
            name = req_str(entry, "name", path)
            tau = req_int(entry, "tau", path=path, minimum=1)
            nu: dict[int, float] = {}
            for res, coeff in (entry.get("nu") or {}).items():
                if res not in self._r_idx:
                    raise ConfigError(f"{path}.nu.{res}", "unknown resource")
                idx = self._r_idx[res]
                if self.resources[idx].cls == "equipment":
                    raise ConfigError(
                        f"{path}.nu.{res}",
                        "equipment is dispatched via the equipment list, not nu",
                    )
                nu[idx] = float(coeff)
            equipment = []
            for e in entry.get("equipment", []):
                if e not in self._r_idx:
                    raise ConfigError(f"{path}.equipment", f"unknown resource {e!r}")
                idx = self._r_idx[e]
                if self.resources[idx].cls != "equipment":
                    raise ConfigError(
                        f"{path}.equipment", f"{e!r} is not an equipment resource"
                    )
                equipment.append(idx)
            v_min = req_num(entry, "v_min", path=path, minimum=0.0)
            v_max = req_num(entry, "v_max", path=path)
            if v_max < v_min:
                raise ConfigError(f"{path}.v_max", f"{v_max} < v_min {v_min}")
            pair_bounds: dict[int, tuple[float, float]] = {}
            for j, unit in enumerate(entry.get("units", [])):
                upath = f"{path}.units[{j}]"
                e = req_str(unit, "equipment", upath)
                if e not in self._r_idx or self._r_idx[e] not in equipment:
                    raise ConfigError(upath, f"{e!r} not in this task's equipment")
                lo = req_num(unit, "v_min", path=upath, minimum=0.0)
                hi = req_num(unit, "v_max", path=upath)
                if hi < lo:
                    raise ConfigError(f"{upath}.v_max", f"{hi} < v_min {lo}")
                pair_bounds[self._r_idx[e]] = (lo, hi)
            self.tasks.append(
                _Task(
                    name=name,
                    tau=tau,
                    nu=nu,
                    equipment=tuple(equipment),
                    utilities=tuple(entry.get("utilities", [])),
                    v_min=v_min,
                    v_max=v_max,
                    pair_bounds=pair_bounds,
                )
            )

    def _build_dispatches(self) -> None:
        self.dispatches: list[_Dispatch] = []
        for ti, task in enumerate(self.tasks):
            if self.mode == "rtn":
                self.dispatches.append(
                    _Dispatch(ti, task.equipment, task.v_min, task.v_max)
                )
            else:
                if not task.equipment:
                    # unit-less task still gets one component
                    self.dispatches.append(_Dispatch(ti, (), task.v_min, task.v_max))
                for e in task.equipment:
                    lo, hi = task.pair_bounds.get(e, (task.v_min, task.v_max))
                    self.dispatches.append(_Dispatch(ti, (e,), lo, hi))
        self._v_min = np.array([d.v_min for d in self.dispatches])
        self._v_max = np.array([d.v_max for d in self.dispatches])

    def _parse_series(self, config: dict) -> None:
        demand = config.get("demand") or {}
        self._demand: dict[int, ForecastWindow] = {}
        for res, series in demand.items():
            if res not in self._r_idx:
                raise ConfigError(f"demand.{res}", "unknown resource")
            idx = self._r_idx[res]
            if self.resources[idx].cls != "product":
                raise ConfigError(f"demand.{res}", "demand is defined for products only")
            # demand past the horizon can never be served; drop it
            self._demand[idx] = ForecastWindow(
                series=np.asarray(series, dtype=np.float64)[: self.T],
                length=self.T,
                horizon=self.T,
            )
        self._util_prices: dict[str, np.ndarray] = {}
        for util, series in (config.get("utility_prices") or {}).items():
            self._util_prices[util] = np.asarray(series, dtype=np.float64)
        for ti, task in enumerate(self.tasks):
            for u in task.utilities:
                if u not in self._util_prices:
                    raise ConfigError(
                        f"tasks[{ti}].utilities", f"no price series for {u!r}"
                    )

    # -- dimensions -----------------------------------------------------------

    @property
    def act_dim(self) -> int:
        return len(self.dispatches)

    @property
    def obs_dim(self) -> int:
        return (
            len(self.resources)
            + self.tau_max * len(self.pend_idx)
            + self.T * len(self.prod_idx)
        )

    # -- dynamics ---------------------------------------------------------------

    def _reset(self) -> np.ndarray:
        self._X = self.x0.copy()
        self._pending = np.zeros((self.tau_max, len(self.pend_idx)))
        return self._observe(0)

    def _observe(self, t: int) -> np.ndarray:
        fd = np.zeros((self.T, len(self.prod_idx)))
        for col, p in enumerate(self.prod_idx):
            fw = self._demand.get(p)
            if fw is not None:
                fd[:, col] = window(fw, t)
        return np.concatenate([self._X, self._pending.ravel(), fd.ravel()])

    def _demand_at(self, t: int) -> dict[int, float]:
        out = {}
        for p in self.prod_idx:
            fw = self._demand.get(p)
            if fw is None or t >= fw.series.shape[0]:
                out[p] = 0.0
            else:
                out[p] = float(fw.series[t])
        return out

    def decode_and_sanitize(self, a_norm: np.ndarray) -> tuple[np.ndarray, float]:
        """Decode normalized components to batches and repair infeasibility.

        Returns (final batches, total |final - scaled| deviation). The scaled
        reference is zeroed for |a_norm| <= eps before deviation accounting.
        """
        scaled = decode_box(a_norm, self._v_min, self._v_max)
        scaled = np.where(np.abs(a_norm) <= self.eps, 0.0, scaled)
        batch = scaled.copy()
        avail = self._X.copy()  # working copy, equipment reserved sequentially
        for j, disp in enumerate(self.dispatches):
            if batch[j] <= 0.0:
                batch[j] = 0.0
                continue
            task = self.tasks[disp.task]
            headroom = math.inf
            for r, coeff in task.nu.items():
                if coeff < 0:
                    headroom = min(
                        headroom, max(0.0, self._X[r] - self.x_min[r]) / abs(coeff)
                    )
            if headroom < disp.v_min:
                batch[j] = 0.0
                continue
            batch[j] = min(batch[j], headroom)
            if any(avail[e] <= 0.0 for e in disp.equipment):
                batch[j] = 0.0
                continue
            for e in disp.equipment:
                avail[e] -= 1.0
        deviation = float(np.abs(batch - scaled).sum())
        return batch, deviation

    def _step(self, a_norm: np.ndarray):
        t = self._t
        X_start = self._X
        batch, deviation = self.decode_and_sanitize(a_norm)

        # dispatches on sub-unit equipment, judged against start-of-step stock
        cost_eq = 0
        for j, disp in enumerate(self.dispatches):
            if batch[j] > 0.0:
                cost_eq += sum(1 for e in disp.equipment if X_start[e] < 1.0)

        X = X_start.copy()
        for j, disp in enumerate(self.dispatches):
            if batch[j] <= 0.0:
                continue
            task = self.tasks[disp.task]
            for r, coeff in task.nu.items():
                if coeff < 0:
                    X[r] += coeff * batch[j]  # consume inputs immediately
            row = task.tau - 1
            for r, coeff in task.nu.items():
                if coeff > 0:
                    self._pending[row, self._pend_col[r]] += coeff * batch[j]
            for e in disp.equipment:
                X[e] -= 1.0
                self._pending[row, self._pend_col[e]] += 1.0

        # deliver the head row, then shift the buffer
        for r, col in self._pend_col.items():
            X[r] += self._pending[0, col]
        self._pending[:-1] = self._pending[1:]
        self._pending[-1] = 0.0

        # bound violations and ordering read the pre-enforcement inventory
        cost_lb = sum(1 for r in self.bound_lb_idx if X[r] < self.x_min[r])
        cost_ub = int(np.sum(X > self.x_max))
        order = sum(
            max(-X[r], 0.0) * self.resources[r].cost for r in self.react_idx
        )

        X = np.minimum(np.maximum(X, self.x_min), self.x_max)
        self._X = X

        demand = self._demand_at(t)
        revenue = 0.0
        unmet = 0.0
        for p in self.prod_idx:
            res = self.resources[p]
            avail_p = X[p] - res.x_min
            revenue += min(avail_p, demand[p]) * res.price
            unmet += 1.5 * max(demand[p] - avail_p, 0.0) * res.price

        util = 0.0
        for j, disp in enumerate(self.dispatches):
            if batch[j] <= 0.0:
                continue
            for u in self.tasks[disp.task].utilities:
                series = self._util_prices[u]
                price = float(series[t]) if t < series.shape[0] else 0.0
                util += batch[j] * price

        reward = revenue - util - unmet - order
        obs = self._observe(t + 1)
        info = {
            "cost_lb": float(cost_lb),
            "cost_ub": float(cost_ub),
            "cost_eq": float(cost_eq),
            "cost_sanit": self.lambda_sanit * deviation,
            "revenue": float(revenue),
            "unmet": float(unmet),
            "order": float(order),
            "util": float(util),
            "sanitized_action": batch,
        }
        return obs, reward, info
