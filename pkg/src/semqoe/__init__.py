"""Semantic-aware QoE resource allocation: simulation, solvers and experiments.

Uplink multi-cell networks where semantic text / VQA users and conventional
bit-pipe users compete for channels and transmit power.  Compression choices
are solved per group (exhaustive or DQN policy), channel and power assignment
by a swap-matching engine with externalities, and everything is wrapped in a
seeded experiment harness emitting CSV results.
"""

from ._kernel import BACKEND as kernel_backend
from .compression import (DqnConfig, ExhaustiveP1Solver, P1Result, P1State, PolicyP1Solver,
                          QPolicy, evaluate_action, load_policy, save_policy,
                          solve_p1_exhaustive, train_dqn, train_policy)
from .evaluate import (BitRateUtilityModel, GroupOutcome, NetworkEvaluator, QoeUtilityModel,
                       SumSrUtilityModel, make_qoe_model, make_sum_sr_model)
from .harness import (ExperimentPlan, FixtureBundle, SolutionMetrics, bundle_from_tables,
                      default_bundle, default_plan, evaluate_solution, run_experiment,
                      solve_scenario)
from .matching import (EngineConfig, Matching, MatchingTrace, audit_constraints,
                       audit_stability, complexity_bound, init_matching, run_matching)
from .netmodel import (Scenario, ScenarioConfig, User, UserGroup, compute_sinr,
                       generate_scenario, load_scenario, save_scenario)
from .qoe import ConvQoeParams, QoeParams, logistic_score
from .semantics import (FidelityTable, MlpFidelityModel, SemanticEntropy, TableFidelityModel,
                        approx_semantic_entropy, fit_fidelity, load_table_csv, save_table_csv,
                        semantic_rate, synth_bimodal_table, synth_single_table)

__version__ = "0.1.0"

__all__ = [
    "kernel_backend", "DqnConfig", "ExhaustiveP1Solver", "P1Result", "P1State",
    "PolicyP1Solver", "QPolicy", "evaluate_action", "load_policy", "save_policy",
    "solve_p1_exhaustive", "train_dqn", "train_policy", "BitRateUtilityModel", "GroupOutcome",
    "NetworkEvaluator", "QoeUtilityModel", "SumSrUtilityModel", "make_qoe_model",
    "make_sum_sr_model", "ExperimentPlan", "FixtureBundle", "SolutionMetrics",
    "bundle_from_tables", "default_bundle", "default_plan", "evaluate_solution",
    "run_experiment", "solve_scenario", "EngineConfig", "Matching", "MatchingTrace",
    "audit_constraints", "audit_stability", "complexity_bound", "init_matching",
    "run_matching", "Scenario", "ScenarioConfig", "User", "UserGroup", "compute_sinr",
    "generate_scenario", "load_scenario", "save_scenario", "ConvQoeParams", "QoeParams",
    "logistic_score", "FidelityTable", "MlpFidelityModel", "SemanticEntropy",
    "TableFidelityModel", "approx_semantic_entropy", "fit_fidelity", "load_table_csv",
    "save_table_csv", "semantic_rate", "synth_bimodal_table", "synth_single_table",
    "__version__",
]
