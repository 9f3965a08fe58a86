"""One small JSON-serializable config per registered environment."""


def _batch():
    return {
        "horizon": 6,
        "lambda_sanit": 1.0,
        "resources": [
            {"name": "A", "class": "reactant", "x0": 5.0, "x_min": 0.0,
             "x_max": 100.0, "cost": 2.0},
            {"name": "P", "class": "product", "x0": 0.0, "x_min": 0.0,
             "x_max": 100.0, "price": 10.0},
            {"name": "RX", "class": "equipment", "x0": 1, "x_min": 0, "x_max": 1},
        ],
        "tasks": [
            {"name": "T1", "tau": 2, "nu": {"A": -1.0, "P": 1.0},
             "equipment": ["RX"], "utilities": ["power"],
             "v_min": 1.0, "v_max": 10.0},
        ],
        "demand": {"P": [4.0] * 6},
        "utility_prices": {"power": [0.5] * 6},
    }


def _uc():
    return {
        "variant": "v0",
        "generators": [
            {"name": "G1", "a": 0.01, "b": 2.0, "c": 1.0, "C_v": 5.0,
             "C_w": 2.0, "UT": 2, "DT": 3, "RU": 8.0, "RD": 8.0,
             "SU": 4.0, "SD": 4.0, "p_min": 0.0, "p_max": 16.0,
             "u0_seq": [0, 0, 0, 0], "p0": 0.0},
            {"name": "G2", "a": 0.005, "b": 1.0, "c": 0.5, "C_v": 3.0,
             "C_w": 1.0, "UT": 3, "DT": 2, "RU": 6.0, "RD": 10.0,
             "SU": 5.0, "SD": 6.0, "p_min": 2.0, "p_max": 8.0,
             "u0_seq": [0, 0, 0, 0], "p0": 0.0},
        ],
        "buses": [{"name": "b1"}],
        "demand": {"b1": [10.0, 12.0, 8.0, 14.0, 6.0, 9.0]},
        "penalty": 1000.0,
        "C_LS": 10.0,
        "C_R": 5.0,
        "reserve": 2.0,
        "window": 2,
        "horizon": 6,
    }


def _gtep():
    return {
        "regions": ["A"],
        "gen_types": [
            {"name": "coal", "cap": 4.0, "inst_cost": 100.0, "max_count": 5}
        ],
        "demand": {"A": [2.0] * 6},
        "lambda0": 10.0,
        "lambda2": 2.0,
        "window": 3,
        "horizon": 4,
        "with_lines": False,
    }


def _blending():
    return {
        "sources": [
            {"name": "A", "props": {"x": 0.2, "y": 1.0}, "ub": 64.0,
             "availability": [4.0] * 8, "price": 1.0},
            {"name": "B", "props": {"x": 0.8, "y": 3.0}, "ub": 64.0,
             "availability": [4.0] * 8, "price": 1.5},
        ],
        "blenders": [{"name": "J1", "ub": 12.0}, {"name": "J2", "ub": 12.0}],
        "demands": [
            {"name": "D", "spec": {"x": [0.3, 0.7], "y": [1.0, 2.0]},
             "ub": 12.0, "caps": [4.0] * 8, "price": 10.0},
        ],
        "arcs": {
            "sj": [["A", "J1"], ["B", "J1"], ["A", "J2"]],
            "jj": [["J1", "J2"]],
            "jp": [["J1", "D"], ["J2", "D"]],
        },
        "fmax": 4.0,
        "alpha": 0.1,
        "beta": 0.05,
        "lambdas": {"bound": 5.0, "bound_fixed": 1.0, "inout": 7.0,
                    "quality": 9.0},
        "eps": 1e-6,
        "window": 2,
        "horizon": 8,
        "strategy": "prop",
    }


def _inv():
    return {
        "nodes": [
            {"name": "S", "kind": "supplier"},
            {"name": "W", "kind": "distributor", "i0": 2.0},
            {"name": "R", "kind": "retailer", "i0": 6.0},
            {"name": "M", "kind": "market"},
        ],
        "routes": [
            {"from": "S", "to": "W", "cap": 8.0, "cost": 1.0, "lt": 2},
            {"from": "W", "to": "R", "cap": 6.0, "cost": 0.5, "lt": 3},
        ],
        "demand_links": [
            {"retailer": "R", "market": "M", "price": 10.0, "c_penalty": 2.0,
             "series": [3.0, 1.0, 4.0, 1.0, 5.0, 2.0, 6.0, 2.0]},
        ],
        "penalties": {"action": 100.0, "on_hand": 10.0, "pipeline": 10.0,
                      "sales": 10.0, "backlog": 10.0},
        "window": 2,
        "horizon": 8,
    }


def _grid():
    return {
        "horizon": 6,
        "window": 2,
        "s_max": 4.0,
        "theta_max": 0.25,
        "buses": ["A", "B"],
        "generators": [
            {"bus": "A", "p_min": 0.0, "p_max": 16.0, "coeffs": [0.0, 2.0]}
        ],
        "lines": [
            {"from": "A", "to": "B", "b": 10.0, "fmax": 2.0,
             "theta_min": -0.25, "theta_max": 0.25}
        ],
        "batteries": [
            {"bus": "A", "e_min": 0.0, "e_max": 8.0, "e0": 4.0,
             "c_max": 4.0, "d_max": 4.0, "eta": 0.5}
        ],
        "demand": {"A": [10.0] * 6, "B": [2.0] * 6},
        "deenergized": {"2": [0]},
        "penalties": {"bal": 7.0, "power": 100.0, "charge": 100.0,
                      "discharge": 100.0, "slack": 11.0, "shed": 100.0,
                      "soc": 13.0, "theta": 17.0, "theta_act": 19.0,
                      "flow_ratio": 23.0},
        "costs": {"k_slack": 5.0, "k_ls": 3.0},
    }


def _sched():
    return {
        "horizon": 12,
        "forecast": 2,
        "alpha_ext": 2.0,
        "q_ext": 4.0,
        "penalties": {"md": 3.0, "mf": 5.0, "em": 7.0, "rp": 11.0, "d": 13.0},
        "compressors": [
            {"cap": 8.0, "spen": 2.0, "mttf": 5, "mttr": 3, "mnrd": 2,
             "tslm0": 2},
            {"cap": 4.0, "spen": 1.0, "mttf": 4, "mttr": 2, "mnrd": 1,
             "tslm0": 1},
        ],
        "demand": [5.0] * 15,
        "electricity": [1.0] * 14,
    }


def _asu():
    d0 = [0.0] * 96
    d0[23], d0[47], d0[71] = 16.0, 8.0, 4.0
    d1 = [0.0] * 96
    d1[23] = 4.0
    return {
        "episode_days": 2,
        "lookahead_days": 1,
        "vertices": [[0.0, 0.0], [8.0, 0.0], [0.0, 4.0]],
        "iv_bounds": [[0.0, 100.0], [0.0, 100.0]],
        "demand": [d0, d1],
        "electricity": [0.5] * 96,
        "c_fixed": 5.0,
        "c_unit": 2.0,
        "rho_iv": 11.0,
        "rho_d": 13.0,
    }


CONFIGS = {
    "rtn": _batch(),
    "stn": _batch(),
    "uc": _uc(),
    "gtep": _gtep(),
    "blending": _blending(),
    "inv_mgmt": _inv(),
    "grid_storage": _grid(),
    "sched_maint": _sched(),
    "asu": _asu(),
}
