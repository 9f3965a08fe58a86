"""Convex-hull production scheduling: windows, dispatch, and hull math."""

import numpy as np
import pytest

from orenvs.asu import AsuEnv
from orenvs.core import ConfigError, DimensionMismatchError, EpisodeFinishedError


def demand_rows():
    d0 = [0.0] * 96
    d0[23], d0[47], d0[71] = 16.0, 8.0, 4.0
    d1 = [0.0] * 96
    d1[23] = 4.0
    return [d0, d1]


def plant(**over):
    cfg = {
        "episode_days": 2,
        "lookahead_days": 1,
        "vertices": [[0.0, 0.0], [8.0, 0.0], [0.0, 4.0]],
        "iv_bounds": [[0.0, 100.0], [0.0, 100.0]],
        "demand": demand_rows(),
        "electricity": [0.5] * 96,
        "c_fixed": 5.0,
        "c_unit": 2.0,
        "rho_iv": 11.0,
        "rho_d": 13.0,
    }
    cfg.update(over)
    return cfg


# two-product plant: [price 0:48 | demand rows 48:96, 96:144 | IV | t]
IV0, IV1, CLOCK = 144, 145, 146

OFF = np.array([-1.0, -1.0, -1.0])
MAKE_A = np.array([-1.0, 1.0, -1.0])  # vertex (8, 0)
MAKE_B = np.array([-1.0, -1.0, 1.0])  # vertex (0, 4)


def test_dims_and_weight_normalization():
    env = AsuEnv(plant())
    assert env.act_dim == 3
    assert env.obs_dim == 147

    np.testing.assert_array_equal(
        env.normalize_weights(np.array([0.2, 0.2, 0.6])), [0.2, 0.2, 0.6]
    )
    np.testing.assert_array_equal(
        env.normalize_weights(np.array([1.0, 1.0, 0.0])), [0.5, 0.5, 0.0]
    )
    np.testing.assert_array_equal(
        env.normalize_weights(np.zeros(3)), np.zeros(3)
    )
    np.testing.assert_array_equal(
        env.normalize_weights(np.array([1e-7, 0.0, 0.0])), np.zeros(3)
    )
    lam = env.normalize_weights(np.array([0.5, 0.5, 0.5]))
    np.testing.assert_array_equal(lam, np.full(3, 0.5 / 1.5))
    with pytest.raises(DimensionMismatchError):
        env.normalize_weights(np.zeros(2))


def test_reward_formula_and_off_state():
    cfg = dict(
        episode_days=1,
        lookahead_days=0,
        vertices=[[10.0, 0.0, 0.0]],
        iv_bounds=[[0.0, 100.0]] * 3,
        demand=[[0.0] * 48] * 3,
        electricity=[0.1] * 48,
        c_fixed=5.0,
        c_unit=2.0,
        rho_iv=11.0,
        rho_d=13.0,
    )
    env = AsuEnv(cfg)
    env.reset()
    assert env.obs_dim == 100  # 24*(1+3) + 3 + 1
    out = env.step(np.array([1.0]))
    assert out.reward == -7.0  # -(5 + 10*2*0.1)
    assert out.cost == 0.0
    np.testing.assert_array_equal(out.observation[96:99], [10.0, 0.0, 0.0])

    out = env.step(np.array([-1.0]))  # off: no fixed cost, nothing produced
    assert out.reward == 0.0 and out.cost == 0.0
    np.testing.assert_array_equal(out.info["sanitized_action"], [0.0])
    np.testing.assert_array_equal(out.observation[96:99], [10.0, 0.0, 0.0])


def test_accumulation_and_hourly_shift():
    env = AsuEnv(plant(electricity=[float(h) for h in range(96)]))
    obs = env.reset()
    np.testing.assert_array_equal(obs[:48], np.arange(48.0))
    assert obs[48 + 23] == 16.0 and obs[48 + 47] == 8.0
    assert obs[96 + 23] == 4.0
    assert obs[CLOCK] == 0.0

    out = env.step(MAKE_A)
    assert out.reward == -5.0  # E[0] = 0: only the fixed cost
    assert out.observation[IV0] == 8.0
    # shifted price window: true data forward, remaining-mean placeholder
    w = np.arange(48.0)
    w = np.append(w[1:], w[1:].mean())
    np.testing.assert_array_equal(out.observation[:48], w)
    assert out.observation[48 + 22] == 16.0
    assert out.observation[48 + 46] == 8.0
    assert out.observation[48 + 47] == 0.0  # demand pads with zero

    out = env.step(MAKE_B)
    assert out.reward == -13.0  # -(5 + 4*2*1)
    np.testing.assert_array_equal(
        out.observation[IV0 : IV1 + 1], [8.0, 4.0]
    )
    w = np.append(w[1:], w[1:].mean())
    np.testing.assert_array_equal(out.observation[:48], w)
    assert out.observation[CLOCK] == 2.0


def test_daily_refresh_restores_true_series():
    env = AsuEnv(plant(electricity=[float(h) for h in range(96)]))
    env.reset()
    for _ in range(24):
        out = env.step(OFF)
    np.testing.assert_array_equal(out.observation[:48], np.arange(24.0, 72.0))
    expected = np.zeros(48)
    expected[23], expected[47] = 8.0, 4.0  # master hours 47 and 71
    np.testing.assert_array_equal(out.observation[48:96], expected)
    assert out.observation[CLOCK] == 24.0


def test_dispatch_shortfall_and_shipping_cap():
    env = AsuEnv(plant(iv0=[10.0, 0.0]))
    env.reset()
    for _ in range(23):
        out = env.step(OFF)
        assert out.info["cost_demand"] == 0.0
        assert out.info["dispatched_0"] == 0.0
    out = env.step(MAKE_A)  # t = 23: available (18, 0) against due (16, 4)
    assert out.info["dispatched_0"] == 16.0
    assert out.info["dispatched_1"] == 0.0
    assert out.info["cost_demand"] == 13.0 * 4.0
    assert out.reward == -13.0  # -(5 + 8*2*0.5)
    np.testing.assert_array_equal(out.observation[IV0 : IV1 + 1], [2.0, 0.0])

    env = AsuEnv(plant(iv0=[10.0, 0.0]))
    env.reset()
    for _ in range(24):
        out = env.step(OFF)  # off at dispatch: inventory still ships
    assert out.info["dispatched_0"] == 10.0
    assert out.info["cost_demand"] == 13.0 * (6.0 + 4.0)
    assert out.reward == 0.0
    assert out.observation[IV0] == 0.0


def test_overflow_priced_then_clipped():
    env = AsuEnv(plant(iv_bounds=[[0.0, 5.0], [0.0, 100.0]]))
    env.reset()
    out = env.step(MAKE_A)  # inventory 8 exceeds the 5 cap by 3
    assert out.info["cost_iv"] == 11.0 * 3.0
    assert out.observation[IV0] == 5.0
    out = env.step(OFF)
    assert out.info["cost_iv"] == 0.0
    assert out.observation[IV0] == 5.0


def test_hull_from_points():
    cfg = plant()
    del cfg["vertices"]
    cfg["points"] = [[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [4.0, 4.0], [2.0, 2.0]]
    env = AsuEnv(cfg)
    assert env.act_dim == 4  # the interior point is not a vertex
    np.testing.assert_array_equal(
        env.V, [[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [4.0, 4.0]]
    )

    cfg = dict(
        episode_days=1,
        lookahead_days=0,
        points=[[3.0], [7.0], [5.0]],
        iv_bounds=[[0.0, 100.0]],
        demand=[[0.0] * 48],
        electricity=[0.5] * 48,
        c_fixed=0.0,
        c_unit=1.0,
        rho_iv=1.0,
        rho_d=1.0,
    )
    env = AsuEnv(cfg)
    np.testing.assert_array_equal(env.V, [[3.0], [7.0]])


def test_random_steps_match_mirror_update():
    cfg = plant()
    env = AsuEnv(cfg)
    verts = np.array(cfg["vertices"])
    master = np.array(cfg["demand"])
    for seed in range(3):
        rng = np.random.default_rng(seed)
        env.reset()
        iv = np.zeros(2)
        for t in range(48):
            out = env.step(rng.uniform(-1.0, 1.0, 3))
            lam = out.info["sanitized_action"]
            assert (lam >= 0).all()
            total = lam.sum()
            assert total == 0.0 or abs(total - 1.0) <= 1e-12
            iv = iv + lam @ verts
            dq = np.zeros(2)
            cost_demand = 0.0
            if t % 24 == 23:
                due = master[:, t]
                dq = np.minimum(iv, due)
                iv = iv - dq
                cost_demand = 13.0 * np.maximum(due - dq, 0.0).sum()
            cost_iv = 11.0 * np.maximum(iv - 100.0, 0.0).sum()
            if cost_iv > 0.0:
                iv = np.minimum(iv, 100.0)
            assert out.info["cost_iv"] == cost_iv
            assert out.info["cost_demand"] == cost_demand
            assert out.info["dispatched_0"] == dq[0]
            assert out.info["dispatched_1"] == dq[1]
            np.testing.assert_array_equal(
                out.observation[IV0 : IV1 + 1], iv
            )
        assert out.terminated
    with pytest.raises(EpisodeFinishedError):
        env.step(OFF)


def test_config_errors():
    def rows(patch):
        d = demand_rows()
        for (j, h), v in patch.items():
            d[j][h] = v
        return d

    cases = [
        {"episode_days": 0},
        {"lookahead_days": -1},
        {"c_fixed": -1.0},
        {"rho_iv": -1.0},
        {"points": [[0.0, 0.0]]},  # both vertices and points
        {"vertices": []},
        {"vertices": [[-1.0, 0.0]]},
        {"vertices": [[0.0, 0.0], [1.0]]},  # ragged
        {"iv_bounds": [[0.0, 100.0]]},
        {"iv_bounds": [[0.0, 100.0, 1.0], [0.0, 100.0, 1.0]]},
        {"iv_bounds": [[5.0, 1.0], [0.0, 100.0]]},
        {"iv_bounds": [[-1.0, 100.0], [0.0, 100.0]]},
        {"iv0": [200.0, 0.0]},
        {"iv0": [1.0]},
        {"demand": [demand_rows()[0]]},
        {"demand": [r[:95] for r in demand_rows()]},
        {"demand": rows({(0, 23): -1.0})},
        {"demand": rows({(0, 10): 1.0})},  # nonzero away from a day mark
        {"electricity": [0.5] * 95},
        {"electricity": [0.5] * 95 + [-1.0]},
    ]
    for over in cases:
        with pytest.raises(ConfigError):
            AsuEnv(plant(**over))

    cfg = plant()
    del cfg["vertices"]
    with pytest.raises(ConfigError):
        AsuEnv(cfg)  # neither vertices nor points

    for bad_points in (
        [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]],  # collinear
        [[0.0] * 4, [1.0] * 4],  # too many products for hull computation
    ):
        cfg = plant()
        del cfg["vertices"]
        cfg["points"] = bad_points
        with pytest.raises(ConfigError):
            AsuEnv(cfg)
