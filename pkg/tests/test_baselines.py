import numpy as np
import pytest

from semqoe import baselines as bl
from semqoe import matching as mt
from semqoe.evaluate import make_qoe_model
from semqoe.netmodel import ScenarioConfig, generate_scenario


def qoe_model(scenario, bundle, g_th=0.5):
    return make_qoe_model(scenario, bundle.fidelity_single, bundle.fidelity_bimodal,
                          bundle.entropy, g_th)


# ---------------------------------------------------------------- random baseline

def test_random_matching_feasible(default_scenario, bundle):
    model = qoe_model(default_scenario, bundle)
    matching = bl.random_matching(default_scenario, seed=3)
    assert isinstance(matching, mt.Matching)
    assert mt.audit_constraints(default_scenario, matching, model) == []
    chan, pow_w = matching.to_user_arrays(default_scenario)
    cfg = default_scenario.config
    for cell in range(cfg.cells):
        mine = [int(c) for uid, c in enumerate(chan)
                if default_scenario.users[uid].cell == cell and c >= 0]
        assert sorted(mine) == list(range(cfg.channels))   # full reuse in every cell
    # random powers actually vary rather than sitting at the minimum
    dbm = {round(float(p), 6) for p in pow_w}
    assert len(dbm) > 1


def test_random_matching_deterministic(default_scenario):
    a = bl.random_matching(default_scenario, seed=7)
    b = bl.random_matching(default_scenario, seed=7)
    c = bl.random_matching(default_scenario, seed=8)
    a_chan, a_pow = a.to_user_arrays(default_scenario)
    b_chan, b_pow = b.to_user_arrays(default_scenario)
    c_chan, c_pow = c.to_user_arrays(default_scenario)
    assert np.array_equal(a_chan, b_chan) and np.array_equal(a_pow, b_pow)
    assert not (np.array_equal(a_chan, c_chan) and np.array_equal(a_pow, c_pow))


def test_random_matching_default_seed_is_scenario_seed(default_scenario):
    assert np.array_equal(
        bl.random_matching(default_scenario).to_user_arrays(default_scenario)[0],
        bl.random_matching(default_scenario, seed=default_scenario.seed)
        .to_user_arrays(default_scenario)[0])


# ---------------------------------------------------------------- upper bound

def test_qoe_upper_bound_counts(default_scenario):
    assert bl.qoe_upper_bound(default_scenario) == 18.0
    crowded = generate_scenario(ScenarioConfig(cells=1, channels=2, n_sem_single=1,
                                               n_sem_pair=2), seed=0)
    assert bl.qoe_upper_bound(crowded) == 2.0       # channel-limited
    sparse = generate_scenario(ScenarioConfig(cells=1, channels=4, n_sem_single=2,
                                              n_sem_pair=0), seed=0)
    assert bl.qoe_upper_bound(sparse) == 2.0        # user-limited


# ---------------------------------------------------------------- fixed-k mapping

def test_fixed_k_action_single(bundle):
    model = bundle.fidelity_single
    assert bl.fixed_k_action(model, 7) == 7
    assert bl.fixed_k_action(model, 0) == 1
    assert bl.fixed_k_action(model, 99) == 20


def test_fixed_k_action_bimodal_ties_go_down(bundle):
    model = bundle.fidelity_bimodal
    # 7 sits between text grid points 6 and 8; 7*197 sits between 6*197 and 8*197
    assert bl.fixed_k_action(model, 7) == (6, 6 * 197)
    assert bl.fixed_k_action(model, 1) == (1, 197)
    assert bl.fixed_k_action(model, 12) == (12, 12 * 197)
    assert bl.fixed_k_action(model, 99) == (12, 16 * 197)


# ---------------------------------------------------------------- engine variants

def test_sum_sr_matching_runs_clean(bundle):
    s = generate_scenario(ScenarioConfig(cells=2, channels=3, n_sem_single=2,
                                         n_sem_pair=2), seed=4)
    matching, trace = bl.sum_sr_matching(s, bundle)
    assert trace.converged
    utils = [r.total_utility for r in trace.rows]
    assert all(b > a for a, b in zip(utils, utils[1:]))
    assert mt.audit_constraints(s, matching, qoe_model(s, bundle)) == []


def test_conventional_allocation_runs_clean(bundle):
    s = generate_scenario(ScenarioConfig(cells=2, channels=3, n_sem_single=2,
                                         n_sem_pair=2), seed=5)
    matching, trace = bl.conventional_allocation(s)
    assert trace.converged
    utils = [r.total_utility for r in trace.rows]
    assert all(b > a for a, b in zip(utils, utils[1:]))
    assert mt.audit_constraints(s, matching, qoe_model(s, bundle)) == []


def test_no_cooperation_equals_proposed_in_single_cell(bundle):
    # with one cell there is no inter-cell interference to ignore
    s = generate_scenario(ScenarioConfig(cells=1, channels=4, n_sem_single=2,
                                         n_sem_pair=1), seed=6)
    model = qoe_model(s, bundle)
    coop, _ = mt.run_matching(s, model, mt.EngineConfig())
    solo, _ = bl.no_cooperation_matching(s, qoe_model(s, bundle), mt.EngineConfig())
    a_chan, a_pow = coop.to_user_arrays(s)
    b_chan, b_pow = solo.to_user_arrays(s)
    assert np.array_equal(a_chan, b_chan)
    assert np.array_equal(a_pow, b_pow)


def test_no_cooperation_multicell_differs_somewhere(bundle):
    for seed in range(4):
        s = generate_scenario(ScenarioConfig(), seed=40 + seed)
        coop, _ = mt.run_matching(s, qoe_model(s, bundle), mt.EngineConfig())
        solo, _ = bl.no_cooperation_matching(s, qoe_model(s, bundle), mt.EngineConfig())
        a = coop.to_user_arrays(s)
        b = solo.to_user_arrays(s)
        if not (np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])):
            return
    pytest.fail("interference awareness never changed any decision")
