"""Command line entry point.

Subcommands cover the full workflow: scenario generation, fixture tables,
surrogate fitting, entropy reporting, policy training, single-instance
solving, batch experiments and solution auditing.  Configuration comes from
one JSON (or TOML on 3.11+) file whose sections override built-in defaults.

Exit codes: 0 ok, 2 configuration error, 3 audit failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .compression import DqnConfig, save_policy, train_policy
from .harness import (AuditError, EXPERIMENTS, EngineConfig, FixtureBundle, bundle_from_tables,
                      default_bundle, default_plan, full_audit, run_experiment, solve_scenario)
from .matching import ConvergenceError, matching_from_jsonable
from .netmodel import (ConfigError, ScenarioConfig, generate_scenario, load_scenario,
                       save_scenario)
from .mlp import TrainingDivergedError
from .semantics import (FitError, approx_semantic_entropy, entropy_report, fit_fidelity,
                        load_table_csv, merge_entropy, save_mlp_model, save_table_csv,
                        synth_bimodal_table, synth_single_table)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            raise ConfigError("TOML config requires Python 3.11+; use JSON here")
        return tomllib.loads(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")


def _dataclass_from(cls, defaults, overrides: dict, section: str):
    """Rebuild a config dataclass with overrides; unknown keys are errors."""
    known = {f.name for f in dataclasses.fields(cls)}
    bad = set(overrides) - known
    if bad:
        raise ConfigError(f"unknown {section} option(s): {', '.join(sorted(bad))}")
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()}
    try:
        return dataclasses.replace(defaults, **clean)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad {section} configuration: {e}")


def _scenario_config(cfg: dict) -> ScenarioConfig:
    return _dataclass_from(ScenarioConfig, ScenarioConfig(), cfg.get("scenario", {}),
                           "scenario")


def _engine_config(cfg: dict) -> EngineConfig:
    return _dataclass_from(EngineConfig, EngineConfig(), cfg.get("engine", {}), "engine")


def _bundle(cfg: dict) -> FixtureBundle:
    epsilon = float(cfg.get("entropy", {}).get("epsilon", 0.05))
    tables = cfg.get("tables", {})
    if "single" in tables or "bimodal" in tables:
        if not ("single" in tables and "bimodal" in tables):
            raise ConfigError("tables section needs both 'single' and 'bimodal' paths")
        return bundle_from_tables(tables["single"], tables["bimodal"], epsilon)
    return default_bundle(epsilon)


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _cmd_gen_scenario(args) -> int:
    cfg = _load_config(args.config)
    scenario = generate_scenario(_scenario_config(cfg), args.seed)
    path = os.path.join(_outdir(args), f"scenario_{args.seed}.json")
    save_scenario(scenario, path)
    print(path)
    return 0


def _cmd_synth_table(args) -> int:
    out = _outdir(args)
    paths = []
    if args.kind in ("single", "both"):
        p = os.path.join(out, "fidelity_single.csv")
        save_table_csv(synth_single_table(), p)
        paths.append(p)
    if args.kind in ("bimodal", "both"):
        p = os.path.join(out, "fidelity_bimodal.csv")
        save_table_csv(synth_bimodal_table(), p)
        paths.append(p)
    for p in paths:
        print(p)
    return 0


def _cmd_fit_fidelity(args) -> int:
    cfg = _load_config(args.config)
    if args.table:
        table = load_table_csv(args.table)
    else:
        table = synth_single_table() if args.kind == "single" else synth_bimodal_table()
    model = fit_fidelity(table, seed=args.seed, **cfg.get("fit", {}))
    path = os.path.join(_outdir(args), f"fidelity_mlp_{args.kind}.json")
    save_mlp_model(model, path)
    print(path)
    return 0


def _cmd_entropy(args) -> int:
    cfg = _load_config(args.config)
    epsilon = args.epsilon if args.epsilon is not None else float(
        cfg.get("entropy", {}).get("epsilon", 0.05))
    tables = cfg.get("tables", {})
    single = load_table_csv(tables["single"]) if "single" in tables else synth_single_table()
    bimodal = (load_table_csv(tables["bimodal"]) if "bimodal" in tables
               else synth_bimodal_table())
    ent = merge_entropy(approx_semantic_entropy(single, epsilon),
                        approx_semantic_entropy(bimodal, epsilon))
    report = entropy_report(ent)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        path = os.path.join(_outdir(args), "entropy.json")
        with open(path, "w") as fh:
            fh.write(text + "\n")
        print(path)
    else:
        print(text)
    return 0


def _cmd_train_policy(args) -> int:
    cfg = _load_config(args.config)
    bundle = _bundle(cfg)
    dqn_cfg = _dataclass_from(DqnConfig, DqnConfig(), cfg.get("dqn", {}), "dqn")
    if args.episodes is not None:
        dqn_cfg = dataclasses.replace(dqn_cfg, episodes=args.episodes,
                                      anneal_episodes=min(dqn_cfg.anneal_episodes,
                                                          args.episodes))
    model = bundle.fidelity_single if args.kind == "single" else bundle.fidelity_bimodal
    policy, curve, report = train_policy(args.kind, model, bundle.entropy,
                                         ScenarioConfig().bandwidth_hz, dqn_cfg,
                                         seed=args.seed, restarts=args.restarts)
    for entry in report:
        print(f"restart seed {entry['seed']}: selection ratio "
              f"{entry['selection_ratio']:.4f}")
    out = _outdir(args)
    path = os.path.join(out, f"policy_{args.kind}.json")
    save_policy(policy, path)
    curve_path = os.path.join(out, f"policy_{args.kind}_curve.csv")
    with open(curve_path, "w") as fh:
        fh.write("episode,epsilon,loss,eval_ratio\n")
        for row in curve:
            ratio = "" if row.eval_ratio is None else format(row.eval_ratio, ".10g")
            fh.write(f"{row.episode},{row.epsilon:.10g},{row.loss:.10g},{ratio}\n")
    print(path)
    print(curve_path)
    return 0


def _cmd_solve(args) -> int:
    cfg = _load_config(args.config)
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        scenario = generate_scenario(_scenario_config(cfg), args.seed)
    bundle = _bundle(cfg)
    g_th = float(cfg.get("qoe", {}).get("g_th", 0.5))
    cache = cfg.get("solver", {}).get("cache_quant_db", 0.5)
    result = solve_scenario(scenario, bundle, g_th, _engine_config(cfg),
                            None if cache is None else float(cache))
    out = _outdir(args)
    path = os.path.join(out, f"solution_{scenario.seed}.json")
    with open(path, "w") as fh:
        json.dump(result.report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    match_path = os.path.join(out, f"matching_{scenario.seed}.json")
    with open(match_path, "w") as fh:
        json.dump(result.report["matching"], fh, indent=2, sort_keys=True)
        fh.write("\n")
    totals = result.report["totals"]
    print(path)
    print(match_path)
    print(f"total_qoe={totals['total_qoe']:.6f} served={sum(totals['served'].values())} "
          f"swaps={result.matching.swap_count}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = _load_config(args.config)
    overrides = dict(cfg.get("experiment", {}))
    workers = int(overrides.pop("workers", 0))
    for key in ("sweep_values", "methods"):
        if key in overrides:
            overrides[key] = tuple(overrides[key])
    if "scenario" in cfg:
        overrides["scenario"] = _scenario_config(cfg)
    if "engine" in cfg:
        overrides["engine"] = _engine_config(cfg)
    if args.drops is not None:
        overrides["drops"] = args.drops
    if args.timing:
        overrides["timing"] = True
    try:
        plan = default_plan(args.experiment, seed=args.seed, **overrides)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e))
    tables = cfg.get("tables", {})
    table_paths = ((tables["single"], tables["bimodal"])
                   if "single" in tables and "bimodal" in tables else None)
    path = run_experiment(plan, _outdir(args), workers=workers, table_paths=table_paths)
    print(path)
    return 0


def _cmd_audit(args) -> int:
    cfg = _load_config(args.config)
    scenario = load_scenario(args.scenario)
    with open(args.matching) as fh:
        matching = matching_from_jsonable(json.load(fh))
    bundle = _bundle(cfg)
    g_th = float(cfg.get("qoe", {}).get("g_th", 0.5))
    report = full_audit(scenario, matching, bundle, g_th, _engine_config(cfg),
                        stability=not args.no_stability)
    print(json.dumps(report, indent=2, sort_keys=True, default=str))
    return 0 if report["clean"] else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semqoe",
                                     description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master random seed")
    common.add_argument("--config", default=None, help="JSON (or TOML) config file")
    common.add_argument("--out", default="out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenario", parents=[common],
                       help="draw and save one network scenario")
    p.set_defaults(func=_cmd_gen_scenario)

    p = sub.add_parser("synth-table", parents=[common],
                       help="write the synthetic fidelity fixture tables")
    p.add_argument("--kind", choices=("single", "bimodal", "both"), default="both")
    p.set_defaults(func=_cmd_synth_table)

    p = sub.add_parser("fit-fidelity", parents=[common],
                       help="fit the MLP surrogate to a fidelity table")
    p.add_argument("--kind", choices=("single", "bimodal"), default="single")
    p.add_argument("--table", default=None, help="table CSV (default: synthetic)")
    p.set_defaults(func=_cmd_fit_fidelity)

    p = sub.add_parser("entropy", parents=[common],
                       help="report approximate semantic entropies")
    p.add_argument("--epsilon", type=float, default=None,
                   help="tolerated fidelity loss (default 0.05)")
    p.set_defaults(func=_cmd_entropy, out=None)

    p = sub.add_parser("train-policy", parents=[common],
                       help="train the compression-selection DQN")
    p.add_argument("--kind", choices=("single", "bimodal"), default="single")
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--restarts", type=int, default=3,
                   help="independent runs; the best by selection QoE is kept")
    p.set_defaults(func=_cmd_train_policy)

    p = sub.add_parser("solve", parents=[common],
                       help="solve one scenario and save the audited solution")
    p.add_argument("--scenario", default=None, help="scenario JSON (default: generate)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("experiment", parents=[common],
                       help="run a batch experiment and emit the results CSV")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--drops", type=int, default=None)
    p.add_argument("--timing", action="store_true",
                   help="record wall times (breaks byte-identical reruns)")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("audit", parents=[common],
                       help="audit a saved matching against its scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--matching", required=True)
    p.add_argument("--no-stability", action="store_true",
                   help="skip the blocking-swap scan")
    p.set_defaults(func=_cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        return args.func(args)
    except AuditError as e:
        print(f"audit failure: {e}", file=sys.stderr)
        return 3
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (FitError, ConvergenceError, TrainingDivergedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
