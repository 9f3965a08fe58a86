"""Multiperiod blending: purchases, pooled mixing, and quality-bound sales.

Material moves source -> blender -> (blender ->) demand along configured
directed arcs. Each step decodes purchases (bounded by the current
availability), sales (bounded by the current demand cap), and per-arc flows
in [0, F^max], then runs four sanitization checks in order:

1. source inventory lower/upper bound (scale outflows / cap the purchase),
2. the in-out rule (a blender must not receive and send in the same step;
   violating blenders get all outflows zeroed),
3. blender inventory lower bound (scale or zero the outflows),
4. demand inventory lower bound (shrink or zero the sale).

``strategy`` picks the repair flavor: ``prop`` rescales offending flow
groups by the exact ratio that lands the inventory on its bound, ``disable``
zeroes them, ``none`` leaves actions untouched. Every violation is priced
from the pre-repair inventory positions regardless of strategy, so the cost
signal is identical whether or not the repair runs. Upper bounds at blenders
and demands are never repaired, only priced and clipped.

Blender property values are flow-weighted convex mixtures of incoming source
properties and upstream blender contents; a blender that empties (inventory
at or below eps) has its properties reset to 0. The quality cost prices each
(blender, property, demand) triple where a positive delivery leaves the
post-update property outside the demand's specification window.

Reward: sales revenue minus purchase spend minus fixed and variable charges
on active source->blender and blender->demand flows (blender-to-blender
transfers are free).

Observation layout: [source inventories | blender inventories | demand
inventories | blender properties (J x Q) | availability windows (S x k) |
demand-cap windows (P x k) | t].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._cfg import req_int, req_list, req_num, req_series, req_str
from .core import ConfigError, Env, ForecastWindow, decode_box, window

__all__ = ["BlendingEnv"]

STRATEGIES = ("prop", "disable", "none")


@dataclass(frozen=True)
class _Source:
    name: str
    props: np.ndarray
    lb: float
    ub: float
    avail: ForecastWindow
    price: float
    i0: float


@dataclass(frozen=True)
class _Blender:
    name: str
    lb: float
    ub: float
    i0: float
    c0: np.ndarray


@dataclass(frozen=True)
class _DemandNode:
    name: str
    spec_lo: np.ndarray
    spec_hi: np.ndarray
    lb: float
    ub: float
    caps: ForecastWindow
    price: float
    i0: float


def _prop_vector(entry: dict, key: str, path: str, q_names: list[str]) -> np.ndarray:
    table = entry.get(key, {})
    if not isinstance(table, dict):
        raise ConfigError(f"{path}.{key}", "must map property name to a value")
    out = np.zeros(len(q_names))
    for i, q in enumerate(q_names):
        if q not in table:
            raise ConfigError(f"{path}.{key}", f"missing property {q!r}")
        out[i] = req_num(table, q, f"{path}.{key}")
    extra = set(table) - set(q_names)
    if extra:
        raise ConfigError(f"{path}.{key}", f"unknown properties {sorted(extra)}")
    return out


class BlendingEnv(Env):
    name = "blending"

    def __init__(self, config: dict):
        super().__init__(req_int(config, "horizon", minimum=1))
        self.fmax = req_num(config, "fmax", minimum=0.0)
        self.alpha = req_num(config, "alpha", minimum=0.0)
        self.beta = req_num(config, "beta", minimum=0.0)
        self.eps = req_num(config, "eps", default=1e-6)
        if self.eps <= 0:
            raise ConfigError("eps", "must be > 0")
        self.k = req_int(config, "window", minimum=1)
        self.strategy = config.get("strategy", "prop")
        if self.strategy not in STRATEGIES:
            raise ConfigError("strategy", f"must be one of {STRATEGIES}")
        lam = config.get("lambdas")
        if not isinstance(lam, dict):
            raise ConfigError("lambdas", "must be a table of penalty factors")
        self.lam_b = req_num(lam, "bound", "lambdas", minimum=0.0)
        self.lam_0b = req_num(lam, "bound_fixed", "lambdas", minimum=0.0)
        self.lam_0m = req_num(lam, "inout", "lambdas", minimum=0.0)
        self.lam_0q = req_num(lam, "quality", "lambdas", minimum=0.0)

        # the property set is the union of every name mentioned anywhere;
        # sources and demand specs must then cover it completely
        q_names: set[str] = set()
        for entry in req_list(config, "sources"):
            if isinstance(entry, dict) and isinstance(entry.get("props"), dict):
                q_names.update(entry["props"])
        for entry in req_list(config, "demands"):
            if isinstance(entry, dict) and isinstance(entry.get("spec"), dict):
                q_names.update(entry["spec"])
        self.q_names = sorted(q_names)
        self.Q = len(self.q_names)

        self._parse_nodes(config)
        self._parse_arcs(config)

    def _parse_nodes(self, config: dict) -> None:
        self.sources: list[_Source] = []
        for i, entry in enumerate(config["sources"]):
            path = f"sources[{i}]"
            lb = req_num(entry, "lb", path=path, default=0.0)
            ub = req_num(entry, "ub", path=path)
            if lb > ub:
                raise ConfigError(path, "lb > ub")
            series = req_series(entry, "availability", path, min_len=1)
            self.sources.append(
                _Source(
                    name=req_str(entry, "name", path),
                    props=_prop_vector(entry, "props", path, self.q_names),
                    lb=lb,
                    ub=ub,
                    avail=ForecastWindow(series=series, length=self.k, horizon=self.T),
                    price=req_num(entry, "price", path=path, default=0.0),
                    i0=req_num(entry, "i0", path=path, minimum=lb, maximum=ub, default=lb),
                )
            )
        self.blenders: list[_Blender] = []
        for i, entry in enumerate(req_list(config, "blenders")):
            path = f"blenders[{i}]"
            lb = req_num(entry, "lb", path=path, default=0.0)
            ub = req_num(entry, "ub", path=path)
            if lb > ub:
                raise ConfigError(path, "lb > ub")
            c0 = np.zeros(self.Q)
            if "c0" in entry:
                c0 = _prop_vector(entry, "c0", path, self.q_names)
            self.blenders.append(
                _Blender(
                    name=req_str(entry, "name", path),
                    lb=lb,
                    ub=ub,
                    i0=req_num(entry, "i0", path=path, minimum=lb, maximum=ub, default=lb),
                    c0=c0,
                )
            )
        self.demands: list[_DemandNode] = []
        for i, entry in enumerate(config["demands"]):
            path = f"demands[{i}]"
            lb = req_num(entry, "lb", path=path, default=0.0)
            ub = req_num(entry, "ub", path=path)
            if lb > ub:
                raise ConfigError(path, "lb > ub")
            spec = entry.get("spec")
            if not isinstance(spec, dict):
                raise ConfigError(f"{path}.spec", "must map property to [lb, ub]")
            lo = np.zeros(self.Q)
            hi = np.zeros(self.Q)
            for qi, q in enumerate(self.q_names):
                pair = spec.get(q)
                if (
                    not isinstance(pair, (list, tuple))
                    or len(pair) != 2
                    or not all(isinstance(v, (int, float)) for v in pair)
                ):
                    raise ConfigError(f"{path}.spec.{q}", "must be a [lb, ub] pair")
                lo[qi], hi[qi] = float(pair[0]), float(pair[1])
                if lo[qi] > hi[qi]:
                    raise ConfigError(f"{path}.spec.{q}", "lb > ub")
            series = req_series(entry, "caps", path, min_len=1)
            self.demands.append(
                _DemandNode(
                    name=req_str(entry, "name", path),
                    spec_lo=lo,
                    spec_hi=hi,
                    lb=lb,
                    ub=ub,
                    caps=ForecastWindow(series=series, length=self.k, horizon=self.T),
                    price=req_num(entry, "price", path=path, default=0.0),
                    i0=req_num(entry, "i0", path=path, minimum=lb, maximum=ub, default=lb),
                )
            )

    def _parse_arcs(self, config: dict) -> None:
        arcs = config.get("arcs")
        if not isinstance(arcs, dict):
            raise ConfigError("arcs", "must hold arc lists sj, jj, jp")
        s_idx = {s.name: i for i, s in enumerate(self.sources)}
        j_idx = {b.name: i for i, b in enumerate(self.blenders)}
        p_idx = {d.name: i for i, d in enumerate(self.demands)}

        def read(kind: str, frm: dict, to: dict) -> list[tuple[int, int]]:
            out: list[tuple[int, int]] = []
            for i, pair in enumerate(arcs.get(kind, [])):
                path = f"arcs.{kind}[{i}]"
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise ConfigError(path, "must be a [from, to] pair")
                a, b = pair
                if a not in frm:
                    raise ConfigError(path, f"unknown node {a!r}")
                if b not in to:
                    raise ConfigError(path, f"unknown node {b!r}")
                arc = (frm[a], to[b])
                if arc in out:
                    raise ConfigError(path, "duplicate arc")
                out.append(arc)
            return out

        self.arcs_sj = read("sj", s_idx, j_idx)
        self.arcs_jj = read("jj", j_idx, j_idx)
        self.arcs_jp = read("jp", j_idx, p_idx)
        seen_pairs: set[frozenset] = set()
        for i, (a, b) in enumerate(self.arcs_jj):
            if a == b:
                raise ConfigError(f"arcs.jj[{i}]", "self-loop")
            pair = frozenset((a, b))
            if pair in seen_pairs:
                raise ConfigError(f"arcs.jj[{i}]", "both directions configured")
            seen_pairs.add(pair)

    # -- dimensions -------------------------------------------------------------

    @property
    def act_dim(self) -> int:
        return (
            len(self.sources)
            + len(self.demands)
            + len(self.arcs_sj)
            + len(self.arcs_jj)
            + len(self.arcs_jp)
        )

    @property
    def obs_dim(self) -> int:
        s, j, p = len(self.sources), len(self.blenders), len(self.demands)
        return s + j + p + j * self.Q + (s + p) * self.k + 1

    # -- state ------------------------------------------------------------------

    def _reset(self) -> np.ndarray:
        self._inv_s = np.array([s.i0 for s in self.sources])
        self._inv_b = np.array([b.i0 for b in self.blenders])
        self._inv_d = np.array([d.i0 for d in self.demands])
        self._c = np.array([b.c0 for b in self.blenders]).reshape(
            len(self.blenders), self.Q
        )
        return self._observe(0)

    def _observe(self, t: int) -> np.ndarray:
        parts = [self._inv_s, self._inv_b, self._inv_d, self._c.ravel()]
        for s in self.sources:
            parts.append(window(s.avail, t))
        for d in self.demands:
            parts.append(window(d.caps, t))
        parts.append(np.array([float(t)]))
        return np.concatenate(parts)

    @staticmethod
    def _series_at(fw: ForecastWindow, t: int) -> float:
        return float(fw.series[t]) if t < fw.series.shape[0] else 0.0

    # -- dynamics -----------------------------------------------------------------

    def _step(self, a_norm: np.ndarray):
        t = self._t
        S, J, P = len(self.sources), len(self.blenders), len(self.demands)
        n_sj, n_jj, n_jp = len(self.arcs_sj), len(self.arcs_jj), len(self.arcs_jp)

        tau_hi = np.array([self._series_at(s.avail, t) for s in self.sources])
        del_hi = np.array([self._series_at(d.caps, t) for d in self.demands])
        cut = np.cumsum([S, P, n_sj, n_jj])
        tau_pre = decode_box(a_norm[: cut[0]], np.zeros(S), tau_hi)
        delta_pre = decode_box(a_norm[cut[0] : cut[1]], np.zeros(P), del_hi)
        zeros = np.zeros
        f_sj_pre = decode_box(
            a_norm[cut[1] : cut[2]], zeros(n_sj), np.full(n_sj, self.fmax)
        )
        f_jj_pre = decode_box(
            a_norm[cut[2] : cut[3]], zeros(n_jj), np.full(n_jj, self.fmax)
        )
        f_jp_pre = decode_box(
            a_norm[cut[3] :], zeros(n_jp), np.full(n_jp, self.fmax)
        )
        repair = self.strategy != "none"
        prop = self.strategy == "prop"

        # 1. source inventory bounds
        src_out_pre = np.zeros(S)
        for a, (s, _) in enumerate(self.arcs_sj):
            src_out_pre[s] += f_sj_pre[a]
        i_s_raw = self._inv_s - src_out_pre + tau_pre
        f_sj = f_sj_pre.copy()
        tau = tau_pre.copy()
        for s, node in enumerate(self.sources):
            if repair and i_s_raw[s] < node.lb - self.eps:
                if prop and src_out_pre[s] > 0:
                    scale = (self._inv_s[s] + tau_pre[s] - node.lb) / src_out_pre[s]
                else:
                    scale = 0.0
                for a, (src, _) in enumerate(self.arcs_sj):
                    if src == s:
                        f_sj[a] *= scale
            if repair and i_s_raw[s] > node.ub + self.eps:
                if prop:
                    tau[s] = min(
                        node.ub + src_out_pre[s] - self._inv_s[s], tau_hi[s]
                    )
                else:
                    tau[s] = 0.0
        src_out = np.zeros(S)
        for a, (s, _) in enumerate(self.arcs_sj):
            src_out[s] += f_sj[a]
        self._inv_s = np.clip(
            self._inv_s - src_out + tau,
            [n.lb for n in self.sources],
            [n.ub for n in self.sources],
        )

        # 2. in-out rule: no blender may both receive and send this step
        bld_in_src = np.zeros(J)
        for a, (_, j) in enumerate(self.arcs_sj):
            bld_in_src[j] += f_sj[a]
        inflow = bld_in_src.copy()
        outflow = np.zeros(J)
        for a, (j_from, j_to) in enumerate(self.arcs_jj):
            inflow[j_to] += f_jj_pre[a]
            outflow[j_from] += f_jj_pre[a]
        for a, (j, _) in enumerate(self.arcs_jp):
            outflow[j] += f_jp_pre[a]
        inout_bad = (inflow > self.eps) & (outflow > self.eps)
        f_jj_pb = f_jj_pre.copy()
        f_jp_pb = f_jp_pre.copy()
        if repair:
            for a, (j_from, _) in enumerate(self.arcs_jj):
                if inout_bad[j_from]:
                    f_jj_pb[a] = 0.0
            for a, (j, _) in enumerate(self.arcs_jp):
                if inout_bad[j]:
                    f_jp_pb[a] = 0.0

        # 3. blender inventory lower bound (evaluated simultaneously)
        bld_in = bld_in_src.copy()
        bld_out = np.zeros(J)
        for a, (j_from, j_to) in enumerate(self.arcs_jj):
            bld_in[j_to] += f_jj_pb[a]
            bld_out[j_from] += f_jj_pb[a]
        for a, (j, _) in enumerate(self.arcs_jp):
            bld_out[j] += f_jp_pb[a]
        i_b_raw = self._inv_b + bld_in - bld_out
        scale_j = np.ones(J)
        if repair:
            for j, node in enumerate(self.blenders):
                if i_b_raw[j] < node.lb - self.eps:
                    if prop and bld_out[j] > 0:
                        scale_j[j] = (
                            self._inv_b[j] + bld_in[j] - node.lb
                        ) / bld_out[j]
                    else:
                        scale_j[j] = 0.0
        f_jj = f_jj_pb.copy()
        f_jp = f_jp_pb.copy()
        for a, (j_from, _) in enumerate(self.arcs_jj):
            f_jj[a] *= scale_j[j_from]
        for a, (j, _) in enumerate(self.arcs_jp):
            f_jp[a] *= scale_j[j]
        inv_b_old = self._inv_b.copy()
        fin_in = bld_in_src.copy()
        fin_out = np.zeros(J)
        for a, (j_from, j_to) in enumerate(self.arcs_jj):
            fin_in[j_to] += f_jj[a]
            fin_out[j_from] += f_jj[a]
        for a, (j, _) in enumerate(self.arcs_jp):
            fin_out[j] += f_jp[a]
        self._inv_b = np.clip(
            inv_b_old + fin_in - fin_out,
            [n.lb for n in self.blenders],
            [n.ub for n in self.blenders],
        )

        # 4. demand inventory lower bound
        dem_in = np.zeros(P)
        for a, (_, p) in enumerate(self.arcs_jp):
            dem_in[p] += f_jp[a]
        i_d_raw = self._inv_d + dem_in - delta_pre
        delta = delta_pre.copy()
        for p, node in enumerate(self.demands):
            if repair and i_d_raw[p] < node.lb - self.eps:
                if prop:
                    delta[p] = self._inv_d[p] + dem_in[p] - node.lb
                else:
                    delta[p] = 0.0
        self._inv_d = np.clip(
            self._inv_d + dem_in - delta,
            [n.lb for n in self.demands],
            [n.ub for n in self.demands],
        )

        # property mixing from the final flows; old contents everywhere on the
        # right-hand side, division by the clipped updated level
        c_old = self._c
        c_new = np.zeros_like(c_old)
        numer = c_old * inv_b_old[:, None]
        for a, (s, j) in enumerate(self.arcs_sj):
            numer[j] += f_sj[a] * self.sources[s].props
        for a, (j_from, j_to) in enumerate(self.arcs_jj):
            numer[j_to] += f_jj[a] * c_old[j_from]
            numer[j_from] -= f_jj[a] * c_old[j_from]
        for a, (j, _) in enumerate(self.arcs_jp):
            numer[j] -= f_jp[a] * c_old[j]
        for j in range(J):
            if self._inv_b[j] > self.eps:
                c_new[j] = numer[j] / self._inv_b[j]
        self._c = c_new

        # costs, from the pre-repair inventory positions
        cost_src = 0.0
        for s, node in enumerate(self.sources):
            if i_s_raw[s] > node.ub + self.eps:
                cost_src += self.lam_b * (self.lam_0b + i_s_raw[s] - node.ub)
            elif i_s_raw[s] < node.lb - self.eps:
                cost_src += self.lam_b * (self.lam_0b + node.lb - i_s_raw[s])
        cost_bld = 0.0
        for j, node in enumerate(self.blenders):
            if i_b_raw[j] > node.ub + self.eps:
                cost_bld += self.lam_b * (self.lam_0b + i_b_raw[j] - node.ub)
            elif i_b_raw[j] < node.lb - self.eps:
                cost_bld += self.lam_b * (self.lam_0b + node.lb - i_b_raw[j])
        cost_dem = 0.0
        for p, node in enumerate(self.demands):
            if i_d_raw[p] > node.ub + self.eps:
                cost_dem += self.lam_b * (self.lam_0b + i_d_raw[p] - node.ub)
            elif i_d_raw[p] < node.lb - self.eps:
                cost_dem += self.lam_b * (self.lam_0b + node.lb - i_d_raw[p])
        cost_inout = self.lam_0m * float(np.count_nonzero(inout_bad))
        cost_quality = 0.0
        for a, (j, p) in enumerate(self.arcs_jp):
            if f_jp[a] > 0:
                node = self.demands[p]
                for q in range(self.Q):
                    if (
                        self._c[j, q] < node.spec_lo[q] - self.eps
                        or self._c[j, q] > node.spec_hi[q] + self.eps
                    ):
                        cost_quality += self.lam_0q

        q_bin = float(np.count_nonzero(f_sj > 0) + np.count_nonzero(f_jp > 0))
        q_float = float(f_sj.sum() + f_jp.sum())
        reward = (
            float(delta @ [d.price for d in self.demands])
            - float(tau @ [s.price for s in self.sources])
            - self.alpha * q_bin
            - self.beta * q_float
        )
        info = {
            "cost_src_bound": cost_src,
            "cost_bld_bound": cost_bld,
            "cost_dem_bound": cost_dem,
            "cost_inout": cost_inout,
            "cost_prop_spec": cost_quality,
            "sanitized_action": np.concatenate([tau, delta, f_sj, f_jj, f_jp]),
        }
        return self._observe(t + 1), reward, info
