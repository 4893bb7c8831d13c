"""Experiment orchestration: fixtures, metrics, plans, CSV emission, audits.

Every experiment is a sweep x Monte-Carlo-drop grid.  The drop index alone
seeds the scenario, so sweep points share drops and comparisons are paired.
Rows are written in a fixed column order; timing defaults to 0.0 so reruns
are byte-identical (enable real timing explicitly when profiling).
"""
from __future__ import annotations

import concurrent.futures
import csv
import time
from dataclasses import dataclass, field, replace

from .baselines import (conventional_allocation, fixed_k_action, no_cooperation_matching,
                        qoe_upper_bound, random_matching, sum_sr_matching)
from .compression import CachedSolver, PolicyP1Solver, evaluate_action, load_policy
from .evaluate import NetworkEvaluator, make_qoe_model, make_sum_sr_model
from .matching import (EngineConfig, audit_constraints, audit_stability, complexity_report,
                       matching_to_jsonable, run_matching)
from .netmodel import Scenario, ScenarioConfig, generate_scenario
from .rng import child_seed
from .semantics import (FitError, TableFidelityModel, approx_semantic_entropy, fit_fidelity,
                        merge_entropy, synth_bimodal_table, synth_single_table,
                        load_table_csv)
from .units import watts_to_dbm


class AuditError(RuntimeError):
    """A produced solution failed the constraint audit."""


@dataclass
class FixtureBundle:
    """Fidelity models plus the entropy record derived from them."""

    fidelity_single: object
    fidelity_bimodal: object
    entropy: object
    table_single: object = None
    table_bimodal: object = None


def default_bundle(epsilon: float = 0.05) -> FixtureBundle:
    """Synthetic fixture tables at the documented parameterisation."""
    ts = synth_single_table()
    tb = synth_bimodal_table()
    entropy = merge_entropy(approx_semantic_entropy(ts, epsilon),
                            approx_semantic_entropy(tb, epsilon))
    return FixtureBundle(TableFidelityModel(ts), TableFidelityModel(tb), entropy, ts, tb)


def bundle_from_tables(single_csv, bimodal_csv, epsilon: float = 0.05) -> FixtureBundle:
    ts = load_table_csv(single_csv)
    tb = load_table_csv(bimodal_csv)
    entropy = merge_entropy(approx_semantic_entropy(ts, epsilon),
                            approx_semantic_entropy(tb, epsilon))
    return FixtureBundle(TableFidelityModel(ts), TableFidelityModel(tb), entropy, ts, tb)


# --- solution metrics ---------------------------------------------------------

SERVED_KEYS = ("semantic_single", "semantic_pair", "conventional_single", "conventional_pair")


@dataclass
class SolutionMetrics:
    total_qoe: float
    qoe_semantic: float
    qoe_conventional: float
    total_sr_suts_s: float
    served: dict
    power_mw: float
    outcomes: dict = field(repr=False, default_factory=dict)


def _power_mw(chan, pow_w) -> float:
    return float(sum(p * 1e3 for c, p in zip(chan, pow_w) if c >= 0 and p > 0))


def evaluate_solution(scenario: Scenario, chan, pow_w, bundle: FixtureBundle,
                      g_th: float, mode: str = "qoe", forced_k=None) -> SolutionMetrics:
    """Exact re-evaluation of an assignment; never uses engine-side caches.

    mode "qoe": logistic QoE with the serving gate; mode "sr": fidelity-weighted
    S-rate with per-member rate floors (conventional users via their equivalent
    S-rate).  forced_k pins semantic groups' compression instead of re-solving.
    """
    if mode not in ("qoe", "sr"):
        raise ValueError(f"unknown evaluation mode {mode!r}")
    qoe_model = make_qoe_model(scenario, bundle.fidelity_single, bundle.fidelity_bimodal,
                               bundle.entropy, g_th, cache_quant_db=None)
    model = qoe_model if mode == "qoe" else make_sum_sr_model(
        scenario, bundle.fidelity_single, bundle.fidelity_bimodal,
        bundle.entropy, cache_quant_db=None)
    evaluator = NetworkEvaluator(scenario, model)
    gamma = evaluator.gammas(chan, pow_w)
    outcomes = {}
    for group in scenario.groups:
        gs = evaluator.member_gammas(group, gamma)
        if forced_k is not None and group.is_semantic and not any(g <= 0 for g in gs):
            outcomes[group.gid] = _forced_outcome(scenario, group, gs, bundle, g_th,
                                                  forced_k, qoe_model)
        else:
            outcomes[group.gid] = model.outcome(group, gs)
    total_qoe = qoe_sem = qoe_conv = total_sr = 0.0
    served = {k: 0 for k in SERVED_KEYS}
    for group in scenario.groups:
        out = outcomes[group.gid]
        total_sr += out.sr_suts_s
        if out.served:
            served[group.kind] += len(group.members)
        total_qoe += out.qoe
        if group.is_semantic:
            qoe_sem += out.qoe
        else:
            qoe_conv += out.qoe
    return SolutionMetrics(total_qoe=total_qoe, qoe_semantic=qoe_sem,
                           qoe_conventional=qoe_conv, total_sr_suts_s=total_sr,
                           served=served, power_mw=_power_mw(chan, pow_w),
                           outcomes=outcomes)


def _forced_outcome(scenario, group, gammas, bundle, g_th, forced_k, qoe_model):
    model = bundle.fidelity_bimodal if group.is_pair else bundle.fidelity_single
    action = forced_k["bimodal" if group.is_pair else "single"]
    state = qoe_model.p1_state(group, gammas)
    out = evaluate_action(model, bundle.entropy, scenario.config.bandwidth_hz, state, action)
    from .evaluate import GroupOutcome, conventional_bit_rate
    qoe = out.qoe if out.served else 0.0
    sr = sum(p * out.xi for p in out.phi_suts_s) if out.served else 0.0
    rates = tuple(conventional_bit_rate(g, scenario.config.bandwidth_hz) for g in gammas)
    return GroupOutcome(group.gid, group.kind, qoe, qoe, out.served, action, out.xi,
                        out.phi_suts_s, sr, rates, out.scores)


# --- experiment plans ---------------------------------------------------------

EXPERIMENTS = ("fit", "g_th_sweep", "algo_compare", "conventional_compare",
               "cooperation", "settings_sweep", "coexistence_qoe", "coexistence_sr")

_COEX_SCENARIO = ScenarioConfig(n_sem_single=3, n_sem_pair=3,
                                n_conv_single=3, n_conv_pair=3)

RESULT_COLUMNS = ("experiment", "method", "sweep_var", "sweep_value", "drop", "seed",
                  "total_qoe", "qoe_semantic", "qoe_conventional", "total_sr_suts_s",
                  "served_sem_single", "served_sem_pair", "served_conv_single",
                  "served_conv_pair", "power_mw", "swap_count", "search_count",
                  "wall_time_s")


@dataclass(frozen=True)
class ExperimentPlan:
    experiment: str
    drops: int = 20
    seed: int = 0
    sweep_var: str = "none"
    sweep_values: tuple = (0,)
    methods: tuple = ("proposed",)
    g_th: float = 0.5
    scenario: ScenarioConfig = ScenarioConfig()
    engine: EngineConfig = EngineConfig()
    cache_quant_db: float | None = 0.5
    solver: str = "exhaustive"           # exhaustive | policy
    policy_single_path: str | None = None
    policy_bimodal_path: str | None = None
    timing: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.drops < 1:
            raise ValueError("drop count must be >= 1")
        if not self.sweep_values:
            raise ValueError("sweep values must be nonempty")
        if self.solver not in ("exhaustive", "policy"):
            raise ValueError(f"unknown solver {self.solver!r}")


def default_plan(experiment: str, drops: int | None = None, seed: int = 0,
                 **overrides) -> ExperimentPlan:
    base = {
        "g_th_sweep": dict(sweep_var="g_th",
                           sweep_values=tuple(round(0.1 * i, 1) for i in range(1, 10)),
                           methods=("proposed", "sum_sr"), drops=20),
        "algo_compare": dict(sweep_var="channels", sweep_values=(4, 5, 6, 7, 8),
                             methods=("proposed", "random", "upper_bound"), drops=20),
        "conventional_compare": dict(sweep_var="channels", sweep_values=(2, 4, 6, 8),
                                     methods=("proposed", "conv_optimal_k", "conv_fixed_k1",
                                              "conv_fixed_k3", "conv_fixed_k5",
                                              "conv_fixed_k7"), drops=20),
        "cooperation": dict(methods=("proposed", "no_cooperation"), drops=50),
        "settings_sweep": dict(sweep_var="n_groups", sweep_values=(2, 3, 4, 5, 6),
                               methods=("proposed", "random"), drops=20),
        "coexistence_qoe": dict(sweep_var="channels", sweep_values=(2, 4, 6, 8),
                                methods=("proposed", "upper_bound"), drops=20,
                                scenario=_COEX_SCENARIO),
        "coexistence_sr": dict(sweep_var="channels", sweep_values=(2, 4, 6, 8),
                               methods=("sum_sr",), drops=20, scenario=_COEX_SCENARIO),
        "fit": dict(methods=("fit",), drops=1),
    }
    if experiment not in base:
        raise ValueError(f"unknown experiment {experiment!r}")
    kwargs = dict(base[experiment])
    if drops is not None:
        kwargs["drops"] = drops
    kwargs.update(overrides)
    return ExperimentPlan(experiment=experiment, seed=seed, **kwargs)


def _apply_sweep(plan: ExperimentPlan, value):
    cfg = plan.scenario
    g_th = plan.g_th
    if plan.sweep_var == "g_th":
        g_th = float(value)
    elif plan.sweep_var == "channels":
        cfg = replace(cfg, channels=int(value))
    elif plan.sweep_var == "n_groups":
        cfg = replace(cfg, n_sem_single=int(value), n_sem_pair=int(value))
    elif plan.sweep_var != "none":
        raise ValueError(f"unknown sweep variable {plan.sweep_var!r}")
    return cfg, g_th


def _qoe_model_for(plan: ExperimentPlan, scenario, bundle, g_th):
    solvers = None
    if plan.solver == "policy":
        solvers = {}
        if plan.policy_single_path:
            pol = load_policy(plan.policy_single_path)
            solvers["single"] = CachedSolver(
                PolicyP1Solver(pol, bundle.fidelity_single, bundle.entropy,
                               scenario.config.bandwidth_hz),
                plan.cache_quant_db) if plan.cache_quant_db else PolicyP1Solver(
                pol, bundle.fidelity_single, bundle.entropy, scenario.config.bandwidth_hz)
        if plan.policy_bimodal_path:
            pol = load_policy(plan.policy_bimodal_path)
            solvers["bimodal"] = CachedSolver(
                PolicyP1Solver(pol, bundle.fidelity_bimodal, bundle.entropy,
                               scenario.config.bandwidth_hz),
                plan.cache_quant_db) if plan.cache_quant_db else PolicyP1Solver(
                pol, bundle.fidelity_bimodal, bundle.entropy, scenario.config.bandwidth_hz)
    return make_qoe_model(scenario, bundle.fidelity_single, bundle.fidelity_bimodal,
                          bundle.entropy, g_th, cache_quant_db=plan.cache_quant_db,
                          p1_solvers=solvers)


def _audit_or_raise(scenario, matching, model, label):
    issues = audit_constraints(scenario, matching, model)
    if issues:
        raise AuditError(f"{label}: " + "; ".join(issues))


@dataclass
class DropResult:
    rows: list
    trace_rows: list = field(default_factory=list)


def run_drop(plan: ExperimentPlan, sweep_idx: int, drop: int,
             bundle: FixtureBundle, shared: dict | None = None) -> DropResult:
    """All requested methods on one (sweep value, drop) cell.

    `shared` may carry matchings reused across sweep points of the same drop;
    only threshold-independent allocations (sum-rate, conventional) are cached
    there, keyed by the scenario configuration, so a g_th sweep pays for them
    once while scenario-changing sweeps naturally miss.
    """
    value = plan.sweep_values[sweep_idx]
    cfg, g_th = _apply_sweep(plan, value)
    seed = child_seed(plan.seed, drop)
    scenario = generate_scenario(cfg, seed)
    eng_cfg = plan.engine
    audit_model = make_qoe_model(scenario, bundle.fidelity_single, bundle.fidelity_bimodal,
                                 bundle.entropy, g_th, cache_quant_db=None)

    cache = shared if shared is not None else {}

    def conventional():
        key = ("conv", cfg, seed)
        if key not in cache:
            t0 = time.perf_counter()
            matching, trace = conventional_allocation(scenario, eng_cfg)
            cache[key] = (matching, trace, time.perf_counter() - t0)
        return cache[key]

    def sum_sr():
        key = ("sum_sr", cfg, seed)
        if key not in cache:
            matching, trace = sum_sr_matching(scenario, bundle, eng_cfg,
                                              plan.cache_quant_db)
            cache[key] = (matching, trace)
        return cache[key]

    rows = []
    trace_rows = []
    for method in plan.methods:
        t0 = time.perf_counter()
        swaps = searches = 0
        mode = "qoe"
        forced = None
        if method == "proposed":
            model = _qoe_model_for(plan, scenario, bundle, g_th)
            matching, trace = run_matching(scenario, model, eng_cfg)
            swaps, searches = matching.swap_count, matching.search_count
            if plan.experiment == "algo_compare" and drop == 0:
                trace_rows = [(value, r.swap_index, r.pass_index, r.cell, r.searches,
                               r.total_utility) for r in trace.rows]
        elif method == "random":
            matching = random_matching(scenario, seed)
        elif method == "upper_bound":
            bound = qoe_upper_bound(scenario)
            rows.append(_row(plan, method, value, drop, seed,
                             SolutionMetrics(bound, bound, 0.0, 0.0,
                                             {k: 0 for k in SERVED_KEYS}, 0.0),
                             0, 0, time.perf_counter() - t0 if plan.timing else 0.0))
            continue
        elif method == "sum_sr":
            matching, trace = sum_sr()
            swaps, searches = matching.swap_count, matching.search_count
            if plan.experiment == "coexistence_sr":
                mode = "sr"
        elif method == "no_cooperation":
            model = _qoe_model_for(plan, scenario, bundle, g_th)
            matching, trace = no_cooperation_matching(scenario, model, eng_cfg)
            swaps, searches = matching.swap_count, matching.search_count
        elif method == "conv_optimal_k":
            matching, trace, _ = conventional()
            swaps, searches = matching.swap_count, matching.search_count
        elif method.startswith("conv_fixed_k"):
            k = int(method.removeprefix("conv_fixed_k"))
            matching, trace, _ = conventional()
            swaps, searches = matching.swap_count, matching.search_count
            forced = {"single": fixed_k_action(bundle.fidelity_single, k),
                      "bimodal": fixed_k_action(bundle.fidelity_bimodal, k)}
        else:
            raise ValueError(f"unknown method {method!r}")
        _audit_or_raise(scenario, matching, audit_model,
                        f"{plan.experiment}/{method}/drop{drop}")
        chan, pow_w = matching.to_user_arrays(scenario)
        metrics = evaluate_solution(scenario, chan, pow_w, bundle, g_th,
                                    mode=mode, forced_k=forced)
        wall = time.perf_counter() - t0 if plan.timing else 0.0
        rows.append(_row(plan, method, value, drop, seed, metrics, swaps, searches, wall))
    return DropResult(rows=rows, trace_rows=trace_rows)


def _row(plan, method, value, drop, seed, metrics: SolutionMetrics,
         swaps, searches, wall) -> dict:
    return {
        "experiment": plan.experiment,
        "method": method,
        "sweep_var": plan.sweep_var,
        "sweep_value": value,
        "drop": drop,
        "seed": seed,
        "total_qoe": metrics.total_qoe,
        "qoe_semantic": metrics.qoe_semantic,
        "qoe_conventional": metrics.qoe_conventional,
        "total_sr_suts_s": metrics.total_sr_suts_s,
        "served_sem_single": metrics.served["semantic_single"],
        "served_sem_pair": metrics.served["semantic_pair"],
        "served_conv_single": metrics.served["conventional_single"],
        "served_conv_pair": metrics.served["conventional_pair"],
        "power_mw": metrics.power_mw,
        "swap_count": swaps,
        "search_count": searches,
        "wall_time_s": wall,
    }


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def write_results_csv(rows: list, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in RESULT_COLUMNS])


def _fit_experiment(plan: ExperimentPlan, out_dir, bundle: FixtureBundle):
    """Surrogate-fit study: train both architectures, report achieved MSE."""
    import numpy as np
    from . import mlp as _mlp
    from .semantics import _table_dataset
    rows = []
    for kind, table in (("single", bundle.table_single), ("bimodal", bundle.table_bimodal)):
        if table is None:
            continue
        try:
            model = fit_fidelity(table, seed=plan.seed)
            x, y = _table_dataset(table)
            mse = float(np.mean((_mlp.forward(model.params, x) - y) ** 2))
            ok = True
        except FitError as e:
            mse = e.final_mse
            ok = False
        rows.append({"kind": kind, "samples": table.values.size, "mse": mse,
                     "target_mse": 1e-3, "converged": ok, "seed": plan.seed})
    path = f"{out_dir}/fit_report.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["kind", "samples", "mse", "target_mse",
                                                "converged", "seed"])
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _fmt(v) for k, v in r.items()})
    return path


def run_drop_all(plan: ExperimentPlan, drop: int, bundle: FixtureBundle) -> list:
    """One drop across every sweep point, sharing threshold-independent work."""
    shared = {}
    return [run_drop(plan, si, drop, bundle, shared)
            for si in range(len(plan.sweep_values))]


def _drop_task(args):
    plan, drop, table_paths = args
    bundle = (bundle_from_tables(*table_paths) if table_paths else default_bundle())
    return drop, run_drop_all(plan, drop, bundle)


def run_experiment(plan: ExperimentPlan, out_dir: str, bundle: FixtureBundle | None = None,
                   workers: int = 0, table_paths=None) -> str:
    """Execute a plan, write results CSV (plus extras), return the CSV path."""
    import os
    os.makedirs(out_dir, exist_ok=True)
    if plan.experiment == "fit":
        if bundle is None:
            bundle = bundle_from_tables(*table_paths) if table_paths else default_bundle()
        return _fit_experiment(plan, out_dir, bundle)
    tasks = [(plan, d, table_paths) for d in range(plan.drops)]
    results = {}
    if workers and workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            for d, res in pool.map(_drop_task, tasks):
                results[d] = res
    else:
        if bundle is None:
            bundle = bundle_from_tables(*table_paths) if table_paths else default_bundle()
        for plan_, d, _ in tasks:
            results[d] = run_drop_all(plan_, d, bundle)
    rows = []
    trace_rows = []
    for si in range(len(plan.sweep_values)):
        for d in range(plan.drops):
            res = results[d][si]
            rows.extend(res.rows)
            trace_rows.extend(res.trace_rows)
    path = f"{out_dir}/results_{plan.experiment}.csv"
    write_results_csv(rows, path)
    if trace_rows:
        with open(f"{out_dir}/trace_{plan.experiment}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sweep_value", "swap_index", "pass", "cell", "searches",
                             "total_qoe"])
            for r in trace_rows:
                writer.writerow([_fmt(v) for v in r])
    return path


# --- single-instance solving (CLI `solve` / `audit`) --------------------------

@dataclass
class SolveResult:
    matching: object
    trace: object
    metrics: SolutionMetrics
    report: dict


def solve_scenario(scenario: Scenario, bundle: FixtureBundle, g_th: float = 0.5,
                   engine: EngineConfig = EngineConfig(),
                   cache_quant_db: float | None = 0.5) -> SolveResult:
    model = make_qoe_model(scenario, bundle.fidelity_single, bundle.fidelity_bimodal,
                           bundle.entropy, g_th, cache_quant_db=cache_quant_db)
    matching, trace = run_matching(scenario, model, engine)
    exact = make_qoe_model(scenario, bundle.fidelity_single, bundle.fidelity_bimodal,
                           bundle.entropy, g_th, cache_quant_db=None)
    issues = audit_constraints(scenario, matching, exact)
    if issues:
        raise AuditError("; ".join(issues))
    chan, pow_w = matching.to_user_arrays(scenario)
    metrics = evaluate_solution(scenario, chan, pow_w, bundle, g_th)
    report = solution_report(scenario, matching, metrics, g_th)
    report["complexity"] = complexity_report(matching, trace, scenario)
    return SolveResult(matching=matching, trace=trace, metrics=metrics, report=report)


def solution_report(scenario: Scenario, matching, metrics: SolutionMetrics,
                    g_th: float) -> dict:
    chan, pow_w = matching.to_user_arrays(scenario)
    users = []
    for u in scenario.users:
        c = int(chan[u.uid])
        users.append({
            "uid": u.uid, "cell": u.cell, "system": u.system, "modality": u.modality,
            "channel": c if c >= 0 else None,
            "power_dbm": float(watts_to_dbm(pow_w[u.uid])) if pow_w[u.uid] > 0 else None,
        })
    groups = []
    for g in scenario.groups:
        out = metrics.outcomes[g.gid]
        action = out.action
        if isinstance(action, tuple):
            action = list(action)
        groups.append({"gid": g.gid, "cell": g.cell, "kind": g.kind,
                       "members": list(g.members), "served": out.served,
                       "qoe": out.qoe, "sr_suts_s": out.sr_suts_s, "action": action})
    return {
        "schema": "semqoe.solution.v1",
        "g_th": g_th,
        "totals": {
            "total_qoe": metrics.total_qoe,
            "qoe_semantic": metrics.qoe_semantic,
            "qoe_conventional": metrics.qoe_conventional,
            "total_sr_suts_s": metrics.total_sr_suts_s,
            "power_mw": metrics.power_mw,
            "served": dict(metrics.served),
        },
        "users": users,
        "groups": groups,
        "matching": matching_to_jsonable(matching),
    }


def full_audit(scenario: Scenario, matching, bundle: FixtureBundle, g_th: float,
               engine: EngineConfig = EngineConfig(),
               cache_quant_db: float | None = 0.5, stability: bool = True) -> dict:
    """Constraint audit plus optional stability scan; clean means both empty."""
    exact = make_qoe_model(scenario, bundle.fidelity_single, bundle.fidelity_bimodal,
                           bundle.entropy, g_th, cache_quant_db=None)
    constraints = audit_constraints(scenario, matching, exact)
    blocking = []
    if stability:
        engine_model = make_qoe_model(scenario, bundle.fidelity_single,
                                      bundle.fidelity_bimodal, bundle.entropy, g_th,
                                      cache_quant_db=cache_quant_db)
        blocking = audit_stability(scenario, matching, engine_model, engine)
    return {"constraints": constraints, "blocking_swaps": blocking,
            "clean": not constraints and not blocking}
