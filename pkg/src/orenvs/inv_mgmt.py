"""Multi-echelon inventory control with lead-time pipelines and backlogs.

A single product moves through a tiered supply network (suppliers,
producers, distributors, retailers, markets) along directed routes, each
with a capacity, a procurement price, a fixed lead time, and a pipeline
holding charge. Every step decodes one order quantity per route, advances
each pipeline by one slot (the front slot arrives at the destination,
the fresh order enters at the back), realizes demand on each
retailer-to-market link, and serves it from retailer stock: sales are
min(demand + carried backlog, on-hand), and the unmet remainder carries
forward as backlog. Shipping an order never draws down the origin node;
upstream nodes act as priced infinite sources, with procurement and
producer operating charges (quantity over yield) pricing every order.

Reward is sales revenue minus procurement, holding (on-hand plus
pipeline), producer operating, and backlog charges.

Cost is pure penalty bookkeeping, in five channels: order decoding prices
any excess outside [0, Cap] (reachable only when raw values bypass the
action-cube clamp), and after the dynamics run, every on-hand, pipeline
slot, sales, and backlog component is clipped to [0, obs_cap] with its
category's penalty factor charged per unit moved. Reward uses the
pre-clip values; the clipped values persist as the stored state.

Demand is a per-link series from the config by default. In ``gaussian``
mode a seeded generator draws the whole horizon at reset (truncated at
zero), so the forecast window always shows the demand that will actually
arrive and identical seeds replay identical episodes.

Observation layout: [on-hand per node | pipeline slots per route (oldest
first) | last sales per link | backlog per link | demand windows
(links x k) | t].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._cfg import req_int, req_list, req_num, req_series, req_str
from .core import (
    ConfigError,
    DimensionMismatchError,
    Env,
    ForecastWindow,
    clip_box,
    window,
)

__all__ = ["InvMgmtEnv"]

KINDS = ("supplier", "producer", "distributor", "retailer", "market")
DEMAND_MODES = ("series", "gaussian")


@dataclass(frozen=True)
class _Node:
    name: str
    kind: str
    i0: float
    c_hold: float
    c_oper: float
    eta: float


@dataclass(frozen=True)
class _Route:
    orig: int
    dest: int
    cap: float
    cost: float
    lt: int
    c_hold: float


@dataclass(frozen=True)
class _DemandLink:
    retailer: int
    market: int
    price: float
    c_penalty: float
    series: np.ndarray
    mu: float
    sigma: float


class InvMgmtEnv(Env):
    name = "inv_mgmt"

    def __init__(self, config: dict):
        super().__init__(req_int(config, "horizon", minimum=1))
        self.eps = req_num(config, "eps", default=1e-6)
        if self.eps <= 0:
            raise ConfigError("eps", "must be > 0")
        self.k = req_int(config, "window", minimum=1)
        self.obs_cap = req_num(config, "obs_cap", minimum=0.0, default=1e9)
        self.demand_mode = config.get("demand_mode", "series")
        if self.demand_mode not in DEMAND_MODES:
            raise ConfigError("demand_mode", f"must be one of {DEMAND_MODES}")
        self.seed = None
        if self.demand_mode == "gaussian":
            self.seed = req_int(config, "seed", minimum=0)

        phi = config.get("penalties")
        if not isinstance(phi, dict):
            raise ConfigError("penalties", "must be a table of penalty factors")
        self.phi_action = req_num(phi, "action", "penalties", minimum=0.0)
        self.phi_on_hand = req_num(phi, "on_hand", "penalties", minimum=0.0)
        self.phi_pipeline = req_num(phi, "pipeline", "penalties", minimum=0.0)
        self.phi_sales = req_num(phi, "sales", "penalties", minimum=0.0)
        self.phi_backlog = req_num(phi, "backlog", "penalties", minimum=0.0)

        self._parse_nodes(config)
        self._parse_routes(config)
        self._parse_links(config)

        self.N = len(self.nodes)
        self.L = len(self.routes)
        self.M = len(self.links)
        self.cap = np.array([r.cap for r in self.routes])
        self._fw = [
            ForecastWindow(series=lk.series, length=self.k, horizon=self.T)
            for lk in self.links
        ]

    def _parse_nodes(self, config: dict) -> None:
        self.nodes: list[_Node] = []
        for i, entry in enumerate(req_list(config, "nodes")):
            path = f"nodes[{i}]"
            kind = req_str(entry, "kind", path)
            if kind not in KINDS:
                raise ConfigError(f"{path}.kind", f"must be one of {KINDS}")
            c_oper, eta = 0.0, 1.0
            if kind == "producer":
                c_oper = req_num(entry, "c_oper", path, minimum=0.0, default=0.0)
                eta = req_num(entry, "eta", path, default=1.0)
                if eta <= 0:
                    raise ConfigError(f"{path}.eta", "must be > 0")
            self.nodes.append(
                _Node(
                    name=req_str(entry, "name", path),
                    kind=kind,
                    i0=req_num(entry, "i0", path, minimum=0.0, default=0.0),
                    c_hold=req_num(entry, "c_hold", path, minimum=0.0, default=0.0),
                    c_oper=c_oper,
                    eta=eta,
                )
            )
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ConfigError("nodes", "duplicate node name")
        self._node_idx = {n: i for i, n in enumerate(names)}

    def _parse_routes(self, config: dict) -> None:
        self.routes: list[_Route] = []
        seen: set[tuple[int, int]] = set()
        for i, entry in enumerate(req_list(config, "routes")):
            path = f"routes[{i}]"
            frm = req_str(entry, "from", path)
            to = req_str(entry, "to", path)
            for name in (frm, to):
                if name not in self._node_idx:
                    raise ConfigError(path, f"unknown node {name!r}")
            if frm == to:
                raise ConfigError(path, "route origin equals destination")
            pair = (self._node_idx[frm], self._node_idx[to])
            if pair in seen:
                raise ConfigError(path, f"duplicate route {frm!r} -> {to!r}")
            seen.add(pair)
            self.routes.append(
                _Route(
                    orig=pair[0],
                    dest=pair[1],
                    cap=req_num(entry, "cap", path, minimum=0.0),
                    cost=req_num(entry, "cost", path, minimum=0.0, default=0.0),
                    lt=req_int(entry, "lt", path, minimum=1),
                    c_hold=req_num(entry, "c_hold", path, minimum=0.0, default=0.0),
                )
            )

    def _parse_links(self, config: dict) -> None:
        self.links: list[_DemandLink] = []
        seen: set[tuple[int, int]] = set()
        for i, entry in enumerate(req_list(config, "demand_links")):
            path = f"demand_links[{i}]"
            r_name = req_str(entry, "retailer", path)
            m_name = req_str(entry, "market", path)
            for name, kind in ((r_name, "retailer"), (m_name, "market")):
                if name not in self._node_idx:
                    raise ConfigError(path, f"unknown node {name!r}")
                if self.nodes[self._node_idx[name]].kind != kind:
                    raise ConfigError(path, f"{name!r} is not a {kind} node")
            pair = (self._node_idx[r_name], self._node_idx[m_name])
            if pair in seen:
                raise ConfigError(path, f"duplicate link {r_name!r} -> {m_name!r}")
            seen.add(pair)
            mu, sigma = 0.0, 0.0
            series = np.zeros(0)
            if self.demand_mode == "gaussian":
                mu = req_num(entry, "mu", path, minimum=0.0)
                sigma = req_num(entry, "sigma", path, minimum=0.0)
            else:
                series = req_series(entry, "series", path, min_len=self.T)
                if np.any(series < 0):
                    raise ConfigError(f"{path}.series", "demand must be >= 0")
            self.links.append(
                _DemandLink(
                    retailer=pair[0],
                    market=pair[1],
                    price=req_num(entry, "price", path, minimum=0.0, default=0.0),
                    c_penalty=req_num(
                        entry, "c_penalty", path, minimum=0.0, default=0.0
                    ),
                    series=series,
                    mu=mu,
                    sigma=sigma,
                )
            )

    # -- dimensions ---------------------------------------------------------

    @property
    def act_dim(self) -> int:
        return self.L

    @property
    def obs_dim(self) -> int:
        slots = sum(r.lt for r in self.routes)
        return self.N + slots + 2 * self.M + self.M * self.k + 1

    # -- operations ---------------------------------------------------------

    def decode_orders(self, a_norm: np.ndarray) -> tuple[np.ndarray, float]:
        """Map raw route actions to order quantities plus a bound penalty.

        The affine map ((a + 1) / 2) * Cap runs on the raw values, so inputs
        outside the action cube decode outside [0, Cap]. Quantities at or
        below eps drop to zero; anything still past a bound is clipped and
        charged phi_action per unit of excess. Inside the cube the penalty
        is structurally zero.
        """
        a = np.asarray(a_norm, dtype=np.float64)
        if a.shape != (self.L,):
            raise DimensionMismatchError(
                f"expected one component per route ({self.L}), got shape {a.shape}"
            )
        q = (a + 1.0) / 2.0 * self.cap
        q[q <= self.eps] = 0.0
        q, excess = clip_box(q, 0.0, self.cap)
        return q, float(self.phi_action * excess.sum())

    # -- env hooks ----------------------------------------------------------

    def _reset(self) -> np.ndarray:
        self._inv = np.array([n.i0 for n in self.nodes])
        self._pipe = [np.zeros(r.lt) for r in self.routes]
        self._sales = np.zeros(self.M)
        self._backlog = np.zeros(self.M)
        if self.demand_mode == "gaussian":
            rng = np.random.default_rng(self.seed)
            self._fw = [
                ForecastWindow(
                    series=np.maximum(rng.normal(lk.mu, lk.sigma, self.T), 0.0),
                    length=self.k,
                    horizon=self.T,
                )
                for lk in self.links
            ]
        return self._observe(0)

    def _observe(self, t: int) -> np.ndarray:
        parts = [self._inv]
        parts.extend(self._pipe)
        parts.append(self._sales)
        parts.append(self._backlog)
        for fw in self._fw:
            parts.append(window(fw, t))
        parts.append(np.array([float(t)]))
        return np.concatenate(parts)

    def _step(self, a_norm: np.ndarray):
        t = self._t
        q, act_penalty = self.decode_orders(a_norm)

        # pipelines pop the front slot (arrival) and push the fresh order
        arrivals = np.zeros(self.N)
        for li, route in enumerate(self.routes):
            pipe = self._pipe[li]
            arrivals[route.dest] += pipe[0]
            pipe[:-1] = pipe[1:]
            pipe[-1] = q[li]
        inv = self._inv + arrivals

        # serve each link from its retailer's stock, in config order
        sales = np.zeros(self.M)
        backlog = np.zeros(self.M)
        for m, link in enumerate(self.links):
            owed = float(self._fw[m].series[t]) + self._backlog[m]
            sales[m] = min(owed, inv[link.retailer])
            inv[link.retailer] -= sales[m]
            backlog[m] = owed - sales[m]

        revenue = sum(sales[m] * lk.price for m, lk in enumerate(self.links))
        procurement = sum(q[li] * r.cost for li, r in enumerate(self.routes))
        holding = sum(inv[n] * node.c_hold for n, node in enumerate(self.nodes))
        holding += sum(
            self._pipe[li].sum() * r.c_hold for li, r in enumerate(self.routes)
        )
        operating = 0.0
        for li, route in enumerate(self.routes):
            origin = self.nodes[route.orig]
            if origin.kind == "producer":
                operating += origin.c_oper / origin.eta * q[li]
        shortage = sum(backlog[m] * lk.c_penalty for m, lk in enumerate(self.links))
        reward = revenue - procurement - holding - operating - shortage

        # clip every state component to [0, obs_cap]: pre-clip excess is
        # priced per category and the clipped values persist
        self._inv, ex = clip_box(inv, 0.0, self.obs_cap)
        cost_on_hand = self.phi_on_hand * ex.sum()
        cost_pipeline = 0.0
        for li in range(self.L):
            self._pipe[li], ex = clip_box(self._pipe[li], 0.0, self.obs_cap)
            cost_pipeline += self.phi_pipeline * ex.sum()
        self._sales, ex = clip_box(sales, 0.0, self.obs_cap)
        cost_sales = self.phi_sales * ex.sum()
        self._backlog, ex = clip_box(backlog, 0.0, self.obs_cap)
        cost_backlog = self.phi_backlog * ex.sum()

        info = {
            "cost_action": act_penalty,
            "cost_on_hand": float(cost_on_hand),
            "cost_pipeline": float(cost_pipeline),
            "cost_sales": float(cost_sales),
            "cost_backlog": float(cost_backlog),
            "sanitized_action": q,
        }
        return self._observe(t + 1), reward, info
