"""Hourly liquid-product scheduling inside a convex production hull.

The plant runs for 24 * episode_days hourly steps. An action is one weight
per hull vertex, decoded onto [0, 1]; when the weights sum to less than
1e-6 the plant is off (zero production, zero reward), otherwise they are
normalized to a convex combination and production is
PQ_j = sum_x lambda_x * v[x, j], guaranteed to lie in the hull of the
configured operating points. Vertices may be given directly, or as raw
historical points whose hull is computed at load (min/max for one
product, scipy's ConvexHull for two or three; vertex rows are kept in
ascending input order). The config supplies either `vertices` or
`points`, never both.

Production accumulates into per-product inventories. At the last hour of
each day (t mod 24 == 23) the day's demand ships:
DQ_j = min(IV_j + PQ_j, demand), and any shortfall costs rho_d per unit.
After the update, inventory above its upper bound costs rho_iv per unit
of excess and is clipped down; the lower bound only constrains the
initial inventory (dispatch guards at zero, exactly as the shipping
formula is written). Reward while on is
-(c_fixed + sum(PQ) * c_unit * E[t]).

Observation: [price window | demand windows (one row per product,
flattened) | inventories | t], windows covering 24 * (lookahead + 1)
hours starting at the current one. At day boundaries both windows reload
true series data; every other hour they shift left, demand padding with
zero and price with the mean of the remaining window (so mid-day window
tails are placeholders by design). Series must span
24 * (episode_days + lookahead_days + 1) hours so the terminal refresh
never pads. Demand is daily: entries away from hours h with
h mod 24 == 23 must be zero.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ._cfg import req_int, req_list, req_num, req_series
from .core import ConfigError, DimensionMismatchError, Env, decode_box

__all__ = ["AsuEnv"]

EPS_OFF = 1e-6


def _matrix(config: dict, key: str, min_rows: int = 1) -> np.ndarray:
    """Read a list of equal-width numeric rows as a 2-D float64 array."""
    rows = [
        req_series(
            {"row": row}, "row", f"{key}[{i}]", min_len=1
        )
        for i, row in enumerate(req_list(config, key, min_len=min_rows))
    ]
    width = rows[0].shape[0]
    for i, row in enumerate(rows):
        if row.shape[0] != width:
            raise ConfigError(f"{key}[{i}]", f"expected {width} entries")
    return np.vstack(rows)


class AsuEnv(Env):
    name = "asu"

    def __init__(self, config: dict):
        days = req_int(config, "episode_days", minimum=1)
        super().__init__(24 * days)
        self.S = req_int(config, "lookahead_days", minimum=0)
        self.win = 24 * (self.S + 1)
        self.c_fixed = req_num(config, "c_fixed", minimum=0.0)
        self.c_unit = req_num(config, "c_unit", minimum=0.0)
        self.rho_iv = req_num(config, "rho_iv", minimum=0.0)
        self.rho_d = req_num(config, "rho_d", minimum=0.0)

        if ("vertices" in config) == ("points" in config):
            raise ConfigError(
                "vertices", "provide exactly one of vertices or points"
            )
        if "vertices" in config:
            self.V = _matrix(config, "vertices")
        else:
            self.V = self._hull(_matrix(config, "points"))
        if np.any(self.V < 0):
            raise ConfigError("vertices", "must be componentwise >= 0")
        self.k, self.m = self.V.shape

        bounds = _matrix(config, "iv_bounds", min_rows=self.m)
        if bounds.shape != (self.m, 2):
            raise ConfigError("iv_bounds", f"expected {self.m} [lb, ub] pairs")
        self.lb = bounds[:, 0]
        self.ub = bounds[:, 1]
        if np.any(self.lb < 0) or np.any(self.lb > self.ub):
            raise ConfigError("iv_bounds", "needs 0 <= lb <= ub per product")
        if "iv0" in config:
            self.iv0 = req_series(config, "iv0", min_len=self.m)
            if self.iv0.shape[0] != self.m:
                raise ConfigError("iv0", f"expected {self.m} entries")
            if np.any(self.iv0 < self.lb) or np.any(self.iv0 > self.ub):
                raise ConfigError("iv0", "must lie within iv_bounds")
        else:
            self.iv0 = self.lb.copy()

        # the refresh at the terminal hour 24*days reads a full window
        hours = 24 * (days + self.S + 1)
        self.demand = _matrix(config, "demand", min_rows=self.m)
        if self.demand.shape[0] != self.m:
            raise ConfigError("demand", f"expected {self.m} product rows")
        if self.demand.shape[1] < hours:
            raise ConfigError("demand", f"each row needs >= {hours} hours")
        if np.any(self.demand < 0):
            raise ConfigError("demand", "must be >= 0")
        off_mark = np.arange(self.demand.shape[1]) % 24 != 23
        if np.any(self.demand[:, off_mark] != 0):
            raise ConfigError(
                "demand", "daily demand only: nonzero away from hour 23 marks"
            )
        self.elec = req_series(config, "electricity", min_len=hours)
        if np.any(self.elec < 0):
            raise ConfigError("electricity", "must be >= 0")

    @staticmethod
    def _hull(points: np.ndarray) -> np.ndarray:
        m = points.shape[1]
        if m == 1:
            lo, hi = float(points.min()), float(points.max())
            return np.array([[lo]] if lo == hi else [[lo], [hi]])
        if m > 3:
            raise ConfigError(
                "points", "hull computation supports at most 3 products"
            )
        try:
            hull = ConvexHull(points)
        except QhullError as exc:
            raise ConfigError("points", f"degenerate point set ({exc})") from None
        return points[np.sort(hull.vertices)]

    # -- dimensions ---------------------------------------------------------

    @property
    def act_dim(self) -> int:
        return self.k

    @property
    def obs_dim(self) -> int:
        return self.win * (1 + self.m) + self.m + 1

    # -- operations ---------------------------------------------------------

    def normalize_weights(self, lam_raw: np.ndarray) -> np.ndarray:
        """Scale clipped weights to a convex combination; all-off below 1e-6."""
        lam = np.asarray(lam_raw, dtype=np.float64)
        if lam.shape != (self.k,):
            raise DimensionMismatchError(
                f"expected {self.k} weights, got shape {lam.shape}"
            )
        total = lam.sum()
        if total < EPS_OFF:
            return np.zeros(self.k)
        return lam / total

    # -- env hooks ----------------------------------------------------------

    def _reset(self) -> np.ndarray:
        self._iv = self.iv0.copy()
        self._e_win = self.elec[: self.win].copy()
        self._d_win = self.demand[:, : self.win].copy()
        return self._observe(0)

    def _observe(self, t: int) -> np.ndarray:
        return np.concatenate(
            [self._e_win, self._d_win.ravel(), self._iv, [float(t)]]
        )

    def _step(self, a_norm: np.ndarray):
        t = self._t
        lam_raw = decode_box(a_norm, np.zeros(self.k), np.ones(self.k))
        lam = self.normalize_weights(lam_raw)
        off = not lam.any()
        pq = lam @ self.V

        iv = self._iv + pq
        dq = np.zeros(self.m)
        cost_demand = 0.0
        if t % 24 == 23:
            due = self.demand[:, t]
            dq = np.minimum(iv, due)
            iv = iv - dq
            cost_demand = self.rho_d * np.maximum(due - dq, 0.0).sum()
        overflow = np.maximum(iv - self.ub, 0.0)
        cost_iv = self.rho_iv * overflow.sum()
        if cost_iv > 0.0:
            iv = np.minimum(iv, self.ub)
        self._iv = iv

        reward = (
            0.0
            if off
            else -(self.c_fixed + pq.sum() * self.c_unit * float(self.elec[t]))
        )

        u = t + 1
        if u % 24 == 0:
            self._e_win = self.elec[u : u + self.win].copy()
            self._d_win = self.demand[:, u : u + self.win].copy()
        else:
            rest = self._e_win[1:]
            self._e_win = np.append(rest, rest.mean())
            self._d_win = np.concatenate(
                [self._d_win[:, 1:], np.zeros((self.m, 1))], axis=1
            )

        info = {"cost_iv": float(cost_iv), "cost_demand": float(cost_demand)}
        for j in range(self.m):
            info[f"dispatched_{j}"] = float(dq[j])
        info["sanitized_action"] = lam
        return self._observe(u), reward, info
