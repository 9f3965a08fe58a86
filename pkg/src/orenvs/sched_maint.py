"""Compressor fleet scheduling with a maintenance automaton.

Each day the agent picks, per compressor, a maintenance flag (decoded to
{0,1} by rounding at 0.5) and a production fraction of capacity, plus one
external-purchase fraction. Three counters drive the automaton: tslm (days
since last maintenance), tlcm (days left to complete maintenance) and cdm
(eligibility, 1 exactly when tslm >= MNRD).

Violation costs are assessed on the RAW decoded actions, before any
repair: interrupting or needlessly extending maintenance costs
rho_md * exp(|tlcm|); running a compressor past MTTF without maintaining
costs rho_mf (escalating linearly beyond the limit); maintaining an
ineligible idle compressor credits -rho_em * tslm exactly as the source
formula is written (the config switch `em_absolute` flips the sign);
producing while maintaining costs rho_rp * prod * Cap; and the day's
demand mismatch costs rho_d * |D[t] - sum prod * Cap| using raw production
and, only when `demand_includes_purchase` is set, the purchase quantity.

Sanitization then repairs the action in a fixed order: force overdue
maintenance (tslm >= MTTF), zero production during maintenance, cancel
ineligible maintenance requests, and keep an in-progress block running
while tlcm > 0. A block therefore spans exactly MTTR consecutive
maintained days with zero production. Reward is charged on the sanitized
actions: -sum SPEN * prod * Cap * E[t] - purchase * Q_ext * alpha_ext.

Observation: [demand D[t+1 .. t+S] | prices E[t .. t+S-1] | tslm | tlcm |
cdm | t]. Windows are raw slices, never padded, so the demand series must
hold T + S + 1 entries (the terminal observation reads index T + S) and
the price series T + S.
"""

from __future__ import annotations

import math

import numpy as np

from ._cfg import req_bool, req_int, req_list, req_num, req_series
from .core import ConfigError, DimensionMismatchError, Env, decode_box

__all__ = ["SchedMaintEnv"]

RHO_KEYS = ("md", "mf", "em", "rp", "d")


class SchedMaintEnv(Env):
    name = "sched_maint"

    def __init__(self, config: dict):
        super().__init__(req_int(config, "horizon", minimum=1))
        self.S = req_int(config, "forecast", minimum=1)
        self.alpha_ext = req_num(config, "alpha_ext", minimum=0.0)
        self.q_ext = req_num(config, "q_ext", minimum=0.0)
        self.em_absolute = req_bool(config, "em_absolute", default=False)
        self.include_purchase = req_bool(
            config, "demand_includes_purchase", default=False
        )

        rho = config.get("penalties")
        if not isinstance(rho, dict):
            raise ConfigError("penalties", "must be a table of rho factors")
        self.rho = {
            key: req_num(rho, key, "penalties", minimum=0.0) for key in RHO_KEYS
        }

        cap, spen, mttf, mttr, mnrd = [], [], [], [], []
        tlcm0, tslm0, cdm0 = [], [], []
        for i, entry in enumerate(req_list(config, "compressors")):
            path = f"compressors[{i}]"
            cap.append(req_num(entry, "cap", path, minimum=0.0))
            spen.append(req_num(entry, "spen", path, minimum=0.0))
            f = req_int(entry, "mttf", path, minimum=1)
            r = req_int(entry, "mttr", path, minimum=1)
            d = req_int(entry, "mnrd", path, minimum=1)
            if d > f:
                # a forced overdue start must also be eligible, else the
                # automaton would drive tlcm negative
                raise ConfigError(f"{path}.mnrd", "must be <= mttf")
            mttf.append(f)
            mttr.append(r)
            mnrd.append(d)
            tlcm0.append(req_int(entry, "tlcm0", path, minimum=0, default=0))
            tslm0.append(req_int(entry, "tslm0", path, minimum=0, default=0))
            if "cdm0" in entry:
                flag = req_int(entry, "cdm0", path, minimum=0)
                if flag not in (0, 1):
                    raise ConfigError(f"{path}.cdm0", "must be 0 or 1")
            else:
                flag = 1 if tslm0[-1] >= d else 0
            cdm0.append(flag)
        self.n = len(cap)
        self.cap = np.array(cap)
        self.spen = np.array(spen)
        self.mttf = np.array(mttf, dtype=np.int64)
        self.mttr = np.array(mttr, dtype=np.int64)
        self.mnrd = np.array(mnrd, dtype=np.int64)
        self.tlcm0 = np.array(tlcm0, dtype=np.int64)
        self.tslm0 = np.array(tslm0, dtype=np.int64)
        self.cdm0 = np.array(cdm0, dtype=np.int64)

        # the terminal observation reads demand up to index T + S; prices
        # stop one short of that
        self.demand = req_series(
            config, "demand", min_len=self.T + self.S + 1
        )
        if np.any(self.demand < 0):
            raise ConfigError("demand", "must be >= 0")
        self.elec = req_series(
            config, "electricity", min_len=self.T + self.S
        )
        if np.any(self.elec < 0):
            raise ConfigError("electricity", "must be >= 0")

    # -- dimensions ---------------------------------------------------------

    @property
    def act_dim(self) -> int:
        return 2 * self.n + 1

    @property
    def obs_dim(self) -> int:
        return 2 * self.S + 3 * self.n + 1

    # -- operations ---------------------------------------------------------

    def decode(self, a_norm: np.ndarray):
        """Split a raw action into (maint flags, prod fractions, purchase).

        Every component decodes onto [0, 1]; maintenance flags round at
        0.5 (a decoded 0.5 counts as maintaining).
        """
        a = np.asarray(a_norm, dtype=np.float64)
        if a.shape != (self.act_dim,):
            raise DimensionMismatchError(
                f"expected action of length {self.act_dim}, got shape {a.shape}"
            )
        unit = decode_box(a, np.zeros(self.act_dim), np.ones(self.act_dim))
        maint = (unit[: self.n] >= 0.5).astype(np.int64)
        prod = unit[self.n : 2 * self.n]
        return maint, prod, float(unit[-1])

    def assess_costs(
        self, maint: np.ndarray, prod: np.ndarray, purchase: float
    ) -> dict:
        """Price the raw decoded actions against the current automaton state.

        Purchase enters only the demand term and only under the
        `demand_includes_purchase` switch.
        """
        t = self._t
        mi = mf = em = ramp = 0.0
        for c in range(self.n):
            tslm, tlcm, cdm = self._tslm[c], self._tlcm[c], self._cdm[c]
            on = maint[c] == 1
            if (not on and tlcm > 0) or (on and tlcm == 0 and tslm == 0) or (
                on and tlcm < 0
            ):
                mi += self.rho["md"] * math.exp(abs(float(tlcm)))
            if not on and tslm > self.mttf[c]:
                mf += self.rho["mf"] * float(tslm - self.mttf[c])
            elif not on and tslm == self.mttf[c]:
                mf += self.rho["mf"]
            if on and cdm == 0 and tlcm == 0:
                term = -self.rho["em"] * float(tslm)
                em += abs(term) if self.em_absolute else term
            if on and prod[c] != 0.0:
                ramp += self.rho["rp"] * prod[c] * self.cap[c]
        supply = float((prod * self.cap).sum())
        if self.include_purchase:
            supply += purchase * self.q_ext
        demand = self.rho["d"] * abs(float(self.demand[t]) - supply)
        return {
            "cost_mi": float(mi),
            "cost_mf": float(mf),
            "cost_em": float(em),
            "cost_ramp": float(ramp),
            "cost_demand": float(demand),
        }

    def _sanitize(self, maint: np.ndarray, prod: np.ndarray):
        m = maint.copy()
        p = prod.copy()
        for c in range(self.n):
            if self._tslm[c] >= self.mttf[c] and m[c] != 1:
                m[c] = 1
                p[c] = 0.0
            if m[c] == 1 and p[c] > 0.0:
                p[c] = 0.0
            if self._cdm[c] == 0 and self._tlcm[c] == 0 and m[c] == 1:
                m[c] = 0
            if self._tlcm[c] > 0 and m[c] != 1:
                m[c] = 1
                p[c] = 0.0
        return m, p

    # -- env hooks ----------------------------------------------------------

    def _reset(self) -> np.ndarray:
        self._tslm = self.tslm0.copy()
        self._tlcm = self.tlcm0.copy()
        self._cdm = self.cdm0.copy()
        return self._observe(0)

    def _observe(self, t: int) -> np.ndarray:
        return np.concatenate(
            [
                self.demand[t + 1 : t + 1 + self.S],
                self.elec[t : t + self.S],
                self._tslm.astype(np.float64),
                self._tlcm.astype(np.float64),
                self._cdm.astype(np.float64),
                [float(t)],
            ]
        )

    def _step(self, a_norm: np.ndarray):
        t = self._t
        maint, prod, purchase = self.decode(a_norm)
        info = self.assess_costs(maint, prod, purchase)
        maint, prod = self._sanitize(maint, prod)

        reward = (
            -float((self.spen * prod * self.cap).sum()) * float(self.elec[t])
            - purchase * self.q_ext * self.alpha_ext
        )

        for c in range(self.n):
            if maint[c] == 1:
                self._tlcm[c] = (
                    self.mttr[c] - 1 if self._cdm[c] == 1 else self._tlcm[c] - 1
                )
                self._tslm[c] = 0
            else:
                self._tslm[c] += 1
            self._cdm[c] = 1 if self._tslm[c] >= self.mnrd[c] else 0

        info["sanitized_action"] = np.concatenate(
            [maint.astype(np.float64), prod, [purchase]]
        )
        return self._observe(t + 1), reward, info
