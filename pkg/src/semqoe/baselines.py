"""Comparison methods: random matching, S-rate maximisation, conventional
bit-rate allocation with fixed or re-optimised compression, no cooperation,
and the served-user upper bound."""
from __future__ import annotations

from .evaluate import BitRateUtilityModel, make_sum_sr_model
from .matching import EngineConfig, Matching, MatchingTrace, _build_matching, run_matching
from .netmodel import Scenario
from .rng import substream
from .semantics import IMAGE_SYMBOLS_PER_UNIT


def random_matching(scenario: Scenario, seed: int | None = None) -> Matching:
    """Feasible uniform assignment: permuted channels, random power levels."""
    if seed is None:
        seed = scenario.seed
    return _build_matching(scenario, substream(seed, "random_baseline"), random_powers=True)


def sum_sr_matching(scenario: Scenario, bundle, config: EngineConfig = EngineConfig(),
                    cache_quant_db: float | None = 0.5):
    """Algorithm-1 engine with group utility = total S-rate under rate floors."""
    model = make_sum_sr_model(scenario, bundle.fidelity_single, bundle.fidelity_bimodal,
                              bundle.entropy, cache_quant_db=cache_quant_db)
    return run_matching(scenario, model, config)


def conventional_allocation(scenario: Scenario, config: EngineConfig = EngineConfig()):
    """Bit-rate-maximising matching; compression is decided afterwards."""
    model = BitRateUtilityModel(scenario)
    return run_matching(scenario, model, config)


def no_cooperation_matching(scenario: Scenario, model,
                            config: EngineConfig = EngineConfig()):
    """Each cell optimises believing there is no inter-cell interference."""
    return run_matching(scenario, model, config, ignore_interference=True)


def qoe_upper_bound(scenario: Scenario) -> float:
    """Sum over cells of min(users, channels): every possible server at score 1."""
    m = scenario.config.channels
    return float(sum(min(scenario.cell_user_count(b), m)
                     for b in range(scenario.config.cells)))


def _nearest_on_grid(grid, k):
    # nearest grid point, ties toward the smaller entry
    return min(grid, key=lambda g: (abs(g - k), g))


def fixed_k_action(model, k_text: int):
    """Map a nominal symbols-per-word choice onto a model's action grid.

    Single-modal models take the nearest k; bimodal models pair the nearest
    text k with the nearest image budget of k_text * 197 symbols.
    """
    if model.kind == "single":
        return _nearest_on_grid(model.k_grids[0], k_text)
    kt = _nearest_on_grid(model.k_grids[0], k_text)
    ki = _nearest_on_grid(model.k_grids[1], k_text * IMAGE_SYMBOLS_PER_UNIT)
    return (kt, ki)
