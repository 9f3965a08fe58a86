"""Compressor maintenance environment: automaton traces and raw-action costs."""

import math

import numpy as np
import pytest

from orenvs.core import ConfigError, DimensionMismatchError, EpisodeFinishedError
from orenvs.sched_maint import SchedMaintEnv

RHO = {"md": 3.0, "mf": 5.0, "em": 7.0, "rp": 11.0, "d": 13.0}


def fleet(**over):
    cfg = {
        "horizon": 6,
        "forecast": 2,
        "alpha_ext": 2.0,
        "q_ext": 4.0,
        "penalties": dict(RHO),
        "compressors": [
            {"cap": 8.0, "spen": 2.0, "mttf": 5, "mttr": 3, "mnrd": 2, "tslm0": 2}
        ],
        "demand": [0.0] * 9,
        "electricity": [1.0] * 8,
    }
    cfg.update(over)
    return cfg


def duo(**over):
    cfg = fleet(
        compressors=[
            {"cap": 8.0, "spen": 2.0, "mttf": 5, "mttr": 3, "mnrd": 2, "tslm0": 2},
            {"cap": 4.0, "spen": 1.0, "mttf": 4, "mttr": 2, "mnrd": 1, "tslm0": 1},
        ]
    )
    cfg.update(over)
    return cfg


# single-compressor observation layout
TSLM, TLCM, CDM, CLOCK = 4, 5, 6, 7


def act(m=-1.0, p=-1.0, buy=-1.0):
    return np.array([m, p, buy])


def test_dims_windows_and_clock():
    cfg = fleet(
        demand=[float(i) for i in range(1, 10)],
        electricity=[10.0 * i for i in range(1, 9)],
    )
    env = SchedMaintEnv(cfg)
    assert env.act_dim == 3
    assert env.obs_dim == 8
    obs = env.reset()
    np.testing.assert_array_equal(obs, [2, 3, 10, 20, 2, 0, 1, 0])
    out = env.step(act())
    np.testing.assert_array_equal(out.observation, [3, 4, 20, 30, 3, 0, 1, 1])
    # the day's mismatch prices D[0] = 1 against zero supply
    assert out.info["cost_demand"] == 13.0
    assert out.reward == 0.0
    for _ in range(5):
        out = env.step(act())
    assert out.terminated
    # terminal windows still read real data: demand[7:9], prices[6:8]
    np.testing.assert_array_equal(out.observation[:4], [8, 9, 70, 80])
    assert out.observation[CLOCK] == 6.0
    with pytest.raises(EpisodeFinishedError):
        env.step(act())


def test_decode_rounds_maintenance_at_half():
    env = SchedMaintEnv(fleet())
    maint, prod, buy = env.decode(act(m=0.0, p=0.0, buy=1.0))
    assert maint[0] == 1  # decoded 0.5 rounds up
    assert prod[0] == 0.5
    assert buy == 1.0
    maint, prod, buy = env.decode(act(m=-0.01))
    assert maint[0] == 0
    maint, *_ = env.decode(act(m=1.0))
    assert maint[0] == 1
    with pytest.raises(DimensionMismatchError):
        env.decode(np.zeros(4))


def test_maintenance_lifecycle_trace():
    env = SchedMaintEnv(fleet())
    env.reset()

    out = env.step(act(m=1.0))  # fresh start, eligible
    assert out.cost == 0.0 and out.reward == 0.0
    np.testing.assert_array_equal(out.info["sanitized_action"], [1, 0, 0])
    assert (out.observation[TSLM], out.observation[TLCM]) == (0.0, 2.0)
    assert out.observation[CDM] == 0.0

    out = env.step(act(m=-1.0))  # abandon mid-block: priced, then forced on
    assert out.info["cost_mi"] == 3.0 * math.exp(2.0)
    assert out.cost == out.info["cost_mi"]
    np.testing.assert_array_equal(out.info["sanitized_action"], [1, 0, 0])
    assert out.observation[TLCM] == 1.0

    out = env.step(act(m=1.0))  # continue legitimately: free
    assert out.cost == 0.0
    assert (out.observation[TSLM], out.observation[TLCM]) == (0.0, 0.0)

    out = env.step(act(m=1.0))  # try to extend past completion
    assert out.info["cost_mi"] == 3.0  # rho_md * exp(0)
    assert out.info["cost_em"] == 0.0  # tslm is 0, the credit vanishes
    np.testing.assert_array_equal(out.info["sanitized_action"], [0, 0, 0])
    assert out.observation[TSLM] == 1.0

    out = env.step(act(m=1.0))  # premature restart one day later
    assert out.info["cost_em"] == -7.0  # verbatim negative credit
    assert out.cost == -7.0
    np.testing.assert_array_equal(out.info["sanitized_action"], [0, 0, 0])
    assert (out.observation[TSLM], out.observation[CDM]) == (2.0, 1.0)

    out = env.step(act(m=1.0))  # eligible again: a normal fresh start
    assert out.cost == 0.0
    assert (out.observation[TSLM], out.observation[TLCM]) == (0.0, 2.0)
    assert out.terminated


def test_forced_overdue_maintenance():
    env = SchedMaintEnv(
        fleet(compressors=[{"cap": 8.0, "spen": 2.0, "mttf": 5, "mttr": 3,
                            "mnrd": 2, "tslm0": 5}])
    )
    env.reset()
    out = env.step(act(m=-1.0, p=0.0))  # declines at tslm == MTTF
    assert out.info["cost_mf"] == 5.0  # equality case
    assert out.info["cost_ramp"] == 0.0  # raw action was not maintaining
    assert out.info["cost_demand"] == 13.0 * 4.0  # raw supply 0.5 * 8
    np.testing.assert_array_equal(out.info["sanitized_action"], [1, 0, 0])
    assert out.reward == 0.0  # forced maintenance zeroed production
    assert (out.observation[TSLM], out.observation[TLCM]) == (0.0, 2.0)

    env = SchedMaintEnv(
        fleet(compressors=[{"cap": 8.0, "spen": 2.0, "mttf": 5, "mttr": 3,
                            "mnrd": 2, "tslm0": 7}])
    )
    env.reset()
    out = env.step(act())
    assert out.info["cost_mf"] == 5.0 * 2.0  # linear beyond the limit


def test_ramp_and_demand_price_raw_production():
    env = SchedMaintEnv(fleet())
    env.reset()
    out = env.step(act(m=1.0, p=0.0))  # produce 0.5 * 8 while maintaining
    assert out.info["cost_ramp"] == 11.0 * 0.5 * 8.0
    assert out.info["cost_demand"] == 13.0 * 4.0
    assert out.cost == 44.0 + 52.0
    np.testing.assert_array_equal(out.info["sanitized_action"], [1, 0, 0])
    assert out.reward == 0.0


def test_reward_and_purchase_switch():
    over = dict(demand=[5.0] * 9, electricity=[0.5] * 8)
    env = SchedMaintEnv(duo(**over))
    env.reset()
    a = np.array([-1.0, -1.0, 0.0, -0.5, 0.0])  # prod 4 + 1, purchase 0.5
    out = env.step(a)
    # production cost (2*0.5*8 + 1*0.25*4) * 0.5, purchase 0.5 * 4 * 2
    assert out.reward == -8.5
    assert out.info["cost_demand"] == 0.0  # formula as printed omits purchase
    assert out.cost == 0.0

    env = SchedMaintEnv(duo(demand_includes_purchase=True, **over))
    env.reset()
    out = env.step(a)
    assert out.info["cost_demand"] == 13.0 * 2.0  # supply 5 + 0.5*4 vs 5
    assert out.reward == -8.5

    env = SchedMaintEnv(duo(**over))
    env.reset()
    out = env.step(np.full(5, -1.0))  # all idle, purchase 0
    assert out.reward == 0.0


def test_em_absolute_switch():
    comp = [{"cap": 8.0, "spen": 2.0, "mttf": 5, "mttr": 3, "mnrd": 2,
             "tslm0": 1}]  # tslm 1 < mnrd: ineligible
    env = SchedMaintEnv(fleet(compressors=comp))
    env.reset()
    out = env.step(act(m=1.0))
    assert out.info["cost_em"] == -7.0
    assert out.cost == -7.0

    env = SchedMaintEnv(fleet(compressors=comp, em_absolute=True))
    env.reset()
    out = env.step(act(m=1.0))
    assert out.info["cost_em"] == 7.0
    assert out.cost == 7.0


def test_random_blocks_span_exactly_mttr():
    cfg = duo(horizon=12, demand=[0.0] * 15, electricity=[1.0] * 14)
    mttr = (3, 2)
    mnrd = (2, 1)
    env = SchedMaintEnv(cfg)
    for seed in range(5):
        rng = np.random.default_rng(seed)
        env.reset()
        flags = ([], [])
        for _ in range(12):
            out = env.step(rng.uniform(-1.0, 1.0, env.act_dim))
            sane = out.info["sanitized_action"]
            tslm = out.observation[4:6]
            tlcm = out.observation[6:8]
            cdm = out.observation[8:10]
            assert (tlcm >= 0).all()
            for c in range(2):
                if sane[c] == 1.0:
                    assert sane[2 + c] == 0.0  # no production in maintenance
                assert cdm[c] == (1.0 if tslm[c] >= mnrd[c] else 0.0)
                flags[c].append(int(sane[c]))
        for c in range(2):
            run = 0
            for v in flags[c]:
                if v:
                    run += 1
                elif run:
                    assert run == mttr[c]  # completed blocks, exact length
                    run = 0
            # a run still open at episode end was cut short, not checked


def test_config_errors():
    comp = {"cap": 8.0, "spen": 2.0, "mttf": 5, "mttr": 3, "mnrd": 2}
    cases = [
        {"horizon": 0},
        {"forecast": 0},
        {"alpha_ext": -1.0},
        {"q_ext": -1.0},
        {"penalties": {k: v for k, v in RHO.items() if k != "em"}},
        {"penalties": dict(RHO, mf=-1.0)},
        {"compressors": []},
        {"compressors": [dict(comp, cap=-1.0)]},
        {"compressors": [dict(comp, spen=-1.0)]},
        {"compressors": [dict(comp, mttf=0)]},
        {"compressors": [dict(comp, mttr=0)]},
        {"compressors": [dict(comp, mnrd=0)]},
        {"compressors": [dict(comp, mnrd=6)]},  # exceeds mttf
        {"compressors": [dict(comp, tlcm0=-1)]},
        {"compressors": [dict(comp, tslm0=-1)]},
        {"compressors": [dict(comp, cdm0=2)]},
        {"demand": [0.0] * 8},  # terminal window needs T + S + 1
        {"demand": [0.0] * 8 + [-1.0]},
        {"electricity": [1.0] * 7},
        {"electricity": [1.0] * 7 + [-1.0]},
        {"em_absolute": 1},
    ]
    for over in cases:
        with pytest.raises(ConfigError):
            SchedMaintEnv(fleet(**over))
