"""End-to-end command line checks, run in process through main()."""
import csv
import json

import numpy as np
import pytest

from semqoe.cli import main
from semqoe.compression import load_policy
from semqoe.matching import matching_from_jsonable
from semqoe.netmodel import load_scenario
from semqoe.semantics import FidelityTable, load_mlp_model, save_table_csv

SMALL_SCENARIO = {"cells": 2, "channels": 3, "n_sem_single": 2, "n_sem_pair": 2}

TINY_DQN = {"anneal_episodes": 4, "steps_per_episode": 2, "buffer_capacity": 128,
            "batch_size": 8, "target_sync_episodes": 2, "warmup_transitions": 16,
            "hidden": [16], "learning_rate": 1e-3, "eval_every": 3, "eval_states": 8}


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(*argv):
    return main([str(a) for a in argv])


# ---------------------------------------------------------------- basics

def test_help_and_bad_usage_exit_codes(capsys):
    assert run("--help") == 0
    assert run("no-such-command") == 2
    assert run("audit") == 2          # missing required --scenario/--matching
    capsys.readouterr()


def test_entropy_stdout(capsys):
    assert run("entropy") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["schema"] == "semqoe.entropy.v1"
    assert report["epsilon"] == 0.05
    assert report["h_si_suts_per_word"] == 5.0
    assert report["h_bi_t_suts_per_word"] == 6.0
    assert report["h_bi_i_suts_per_image"] == 2364.0


def test_synth_table_then_entropy_from_files(tmp_path, capsys):
    assert run("synth-table", "--kind", "both", "--out", tmp_path) == 0
    single = tmp_path / "fidelity_single.csv"
    bimodal = tmp_path / "fidelity_bimodal.csv"
    assert single.exists() and bimodal.exists()
    capsys.readouterr()
    cfg = write_config(tmp_path, {"tables": {"single": str(single),
                                             "bimodal": str(bimodal)}})
    assert run("entropy", "--config", cfg) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["h_si_suts_per_word"] == 5.0
    assert report["h_bi_i_suts_per_image"] == 2364.0


def test_config_errors_exit_2(tmp_path, capsys):
    bad_json = tmp_path / "broken.json"
    bad_json.write_text("{not json")
    assert run("entropy", "--config", bad_json) == 2
    cfg = write_config(tmp_path, {"scenario": {"n_cells": 2}})  # unknown key
    assert run("gen-scenario", "--config", cfg, "--out", tmp_path) == 2
    cfg = write_config(tmp_path, {"tables": {"single": "only_half.csv"}})
    assert run("entropy", "--config", cfg) == 2
    assert run("entropy", "--config", str(tmp_path / "missing.json")) == 2
    capsys.readouterr()


# ---------------------------------------------------------------- scenario/solve/audit

def test_gen_scenario_writes_loadable_file(tmp_path, capsys):
    cfg = write_config(tmp_path, {"scenario": SMALL_SCENARIO})
    assert run("gen-scenario", "--config", cfg, "--seed", 7, "--out", tmp_path) == 0
    path = capsys.readouterr().out.strip()
    assert path.endswith("scenario_7.json")
    scenario = load_scenario(path)
    assert scenario.seed == 7
    assert len(scenario.users) == 2 + 2 * 2
    assert scenario.config.channels == 3


def test_solve_audit_chain_and_tamper(tmp_path, capsys):
    cfg = write_config(tmp_path, {"scenario": SMALL_SCENARIO})
    assert run("gen-scenario", "--config", cfg, "--seed", 3, "--out", tmp_path) == 0
    scenario_path = capsys.readouterr().out.strip()
    assert run("solve", "--config", cfg, "--scenario", scenario_path,
               "--out", tmp_path) == 0
    out = capsys.readouterr().out.splitlines()
    solution_path, matching_path = out[0], out[1]
    assert "total_qoe=" in out[2] and "swaps=" in out[2]
    report = json.loads(open(solution_path).read())
    assert report["schema"] == "semqoe.solution.v1"

    assert run("audit", "--config", cfg, "--scenario", scenario_path,
               "--matching", matching_path) == 0
    audit = json.loads(capsys.readouterr().out)
    assert audit["clean"] and audit["constraints"] == []

    data = json.load(open(matching_path))
    tampered = matching_from_jsonable(data)
    cell = tampered.cells[0]
    player = next(p for p in cell.players if not p.is_virtual and not p.is_pair)
    res = cell.assign[player.key]
    cell.assign[player.key] = type(res)(res.channels, (res.powers_dbm[0] + 0.37,))
    from semqoe.matching import matching_to_jsonable
    bad_path = tmp_path / "tampered.json"
    bad_path.write_text(json.dumps(matching_to_jsonable(tampered)))
    assert run("audit", "--config", cfg, "--scenario", scenario_path,
               "--matching", bad_path, "--no-stability") == 3
    audit = json.loads(capsys.readouterr().out)
    assert not audit["clean"]
    assert any(i.startswith("C6") for i in audit["constraints"])


def test_solve_deterministic_output(tmp_path, capsys):
    cfg = write_config(tmp_path, {"scenario": SMALL_SCENARIO})
    assert run("solve", "--config", cfg, "--seed", 5, "--out", tmp_path / "a") == 0
    assert run("solve", "--config", cfg, "--seed", 5, "--out", tmp_path / "b") == 0
    capsys.readouterr()
    a = (tmp_path / "a" / "solution_5.json").read_bytes()
    b = (tmp_path / "b" / "solution_5.json").read_bytes()
    assert a == b


# ---------------------------------------------------------------- fitting/training

def test_fit_fidelity_success_and_failure(tmp_path, capsys):
    flat = FidelityTable("single", (tuple(range(1, 21)),),
                         (tuple(np.linspace(-10.0, 20.0, 31).tolist()),),
                         np.full((20, 31), 0.5))
    table_path = tmp_path / "flat.csv"
    save_table_csv(flat, table_path)
    cfg = write_config(tmp_path, {"fit": {"epochs": 500}})
    assert run("fit-fidelity", "--kind", "single", "--table", table_path,
               "--config", cfg, "--out", tmp_path) == 0
    model_path = capsys.readouterr().out.strip()
    model = load_mlp_model(model_path)
    assert abs(model.evaluate((7,), (3.0,)) - 0.5) < 0.05

    hopeless = write_config(tmp_path, {"fit": {"epochs": 2}}, "hopeless.json")
    coarse = FidelityTable("single", ((1, 2, 4, 8),),
                           ((-10.0, 0.0, 10.0, 20.0),),
                           np.linspace(0.1, 0.9, 16).reshape(4, 4))
    coarse_path = tmp_path / "coarse.csv"
    save_table_csv(coarse, coarse_path)
    assert run("fit-fidelity", "--kind", "single", "--table", coarse_path,
               "--config", hopeless, "--out", tmp_path) == 1
    assert "error:" in capsys.readouterr().err


def test_train_policy_cmd(tmp_path, capsys):
    cfg = write_config(tmp_path, {"dqn": TINY_DQN})
    assert run("train-policy", "--kind", "single", "--episodes", 6,
               "--restarts", 2, "--config", cfg, "--seed", 1,
               "--out", tmp_path) == 0
    out = capsys.readouterr().out.splitlines()
    assert sum("restart seed" in line for line in out) == 2
    policy_path = tmp_path / "policy_single.json"
    curve_path = tmp_path / "policy_single_curve.csv"
    assert str(policy_path) in out and str(curve_path) in out
    policy = load_policy(policy_path)
    assert policy.kind == "single"
    rows = list(csv.DictReader(open(curve_path)))
    assert len(rows) == 6
    assert [r["episode"] for r in rows] == [str(i) for i in range(6)]


# ---------------------------------------------------------------- experiments

def test_experiment_cmd(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "scenario": SMALL_SCENARIO,
        "experiment": {"sweep_values": [0.4], "methods": ["proposed", "random"]},
    })
    assert run("experiment", "g_th_sweep", "--drops", 2, "--config", cfg,
               "--out", tmp_path) == 0
    path = capsys.readouterr().out.strip()
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == 2 * 2
    assert {r["method"] for r in rows} == {"proposed", "random"}
    assert all(r["sweep_value"] == "0.4" for r in rows)
    assert all(r["sweep_var"] == "g_th" for r in rows)


def test_experiment_bad_override_exit_2(tmp_path, capsys):
    cfg = write_config(tmp_path, {"experiment": {"mystery_knob": 1}})
    assert run("experiment", "g_th_sweep", "--config", cfg, "--out", tmp_path) == 2
    capsys.readouterr()
