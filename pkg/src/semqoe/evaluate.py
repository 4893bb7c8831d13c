"""Group utility models over SINR outcomes: QoE, S-rate and bit-rate objectives.

A utility model maps (group, member SINRs) to the scalar the matching engine
optimises, and can expand the same inputs into a full reporting outcome.
Engine-facing solves may run through quantised caches; reporting always
re-evaluates exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compression import (CachedSolver, ExhaustiveP1Solver, P1State, SrExhaustiveSolver,
                          SrState, evaluate_action)
from .netmodel import (CONV_PAIR, CONV_SINGLE, SEM_PAIR, SEM_SINGLE, Scenario, SinrWorkspace,
                       UserGroup)
from .qoe import conventional_user_score
from .semantics import (MU_IMAGE_BITS_PER_IMAGE, MU_TEXT_BITS_PER_WORD, SemanticEntropy,
                        conventional_bit_rate, equivalent_s_rate)

# engine-side normaliser for rate utilities so coalition deltas are O(1)
SR_UTILITY_SCALE = 1e6        # suts/s
BITRATE_UTILITY_SCALE = 1e6   # bit/s


def gamma_db_of(gamma_linear: float) -> float:
    return 10.0 * math.log10(gamma_linear)


@dataclass
class GroupOutcome:
    gid: int
    kind: str
    utility: float
    qoe: float
    served: bool
    action: object            # chosen k (int or pair) for semantic groups, else None
    xi: float | None
    phi_suts_s: tuple         # semantic rate per member (suts/s)
    sr_suts_s: float          # fidelity-weighted S-rate total (or equivalent S-rate)
    bit_rate_bit_s: tuple     # Shannon rates per member
    scores: tuple             # per-member score tuples


class QoeUtilityModel:
    """Total network QoE with the serving gate; the primary objective."""

    label = "qoe"

    def __init__(self, scenario: Scenario, fidelity_single, fidelity_bimodal,
                 entropy: SemanticEntropy, g_th: float,
                 single_solver=None, pair_solver=None):
        if not (0.0 <= g_th <= 1.0):
            raise ValueError("serving threshold must lie in [0, 1]")
        self.scenario = scenario
        self.entropy = entropy
        self.g_th = float(g_th)
        self.bandwidth_hz = scenario.config.bandwidth_hz
        self.fidelity_single = fidelity_single
        self.fidelity_bimodal = fidelity_bimodal
        need_single = any(g.kind == SEM_SINGLE for g in scenario.groups)
        need_pair = any(g.kind == SEM_PAIR for g in scenario.groups)
        if single_solver is None and need_single:
            if fidelity_single is None:
                raise ValueError("semantic single groups need a single-modal fidelity model")
            single_solver = ExhaustiveP1Solver(fidelity_single, entropy, self.bandwidth_hz)
        if pair_solver is None and need_pair:
            if fidelity_bimodal is None:
                raise ValueError("semantic pairs need a bimodal fidelity model")
            pair_solver = ExhaustiveP1Solver(fidelity_bimodal, entropy, self.bandwidth_hz)
        self.single_solver = single_solver
        self.pair_solver = pair_solver
        # exact solvers for reporting, never cached
        self._exact_single = (ExhaustiveP1Solver(fidelity_single, entropy, self.bandwidth_hz)
                              if fidelity_single is not None and need_single else None)
        self._exact_pair = (ExhaustiveP1Solver(fidelity_bimodal, entropy, self.bandwidth_hz)
                            if fidelity_bimodal is not None and need_pair else None)

    def p1_state(self, group: UserGroup, gammas) -> P1State:
        users = [self.scenario.users[uid] for uid in group.members]
        kind = "bimodal" if group.is_pair else "single"
        return P1State(kind=kind,
                       sinr_db=tuple(gamma_db_of(g) for g in gammas),
                       params=tuple(u.qoe for u in users),
                       g_th=self.g_th)

    def _conv_eval(self, group: UserGroup, gammas):
        users = [self.scenario.users[uid] for uid in group.members]
        rates = tuple(conventional_bit_rate(g, self.bandwidth_hz) for g in gammas)
        scores = tuple(conventional_user_score(u.conv_qoe, c) for u, c in zip(users, rates))
        served = all(s >= self.g_th for s in scores)
        total = sum(scores) if served else 0.0
        return rates, scores, served, total

    def utility(self, group: UserGroup, gammas) -> float:
        if any(g <= 0.0 for g in gammas):
            return 0.0
        if group.is_semantic:
            solver = self.pair_solver if group.is_pair else self.single_solver
            return solver.solve(self.p1_state(group, gammas)).qoe
        return self._conv_eval(group, gammas)[3]

    def outcome(self, group: UserGroup, gammas) -> GroupOutcome:
        gammas = tuple(float(g) for g in gammas)
        if any(g <= 0.0 for g in gammas):
            return GroupOutcome(group.gid, group.kind, 0.0, 0.0, False, None, None,
                                (0.0,) * len(group.members), 0.0,
                                (0.0,) * len(group.members), ())
        if group.is_semantic:
            solver = self._exact_pair if group.is_pair else self._exact_single
            model = self.fidelity_bimodal if group.is_pair else self.fidelity_single
            state = self.p1_state(group, gammas)
            res = solver.solve(state)
            out = evaluate_action(model, self.entropy, self.bandwidth_hz, state, res.action)
            sr = sum(p * out.xi for p in out.phi_suts_s)
            rates = tuple(conventional_bit_rate(g, self.bandwidth_hz) for g in gammas)
            return GroupOutcome(group.gid, group.kind, res.qoe, res.qoe, res.served,
                                res.action, out.xi, out.phi_suts_s, sr if res.served else 0.0,
                                rates, out.scores)
        rates, scores, served, total = self._conv_eval(group, gammas)
        sr = sum(equivalent_s_rate(c, *_mu_entropy(self.scenario.users[uid], group, self.entropy))
                 for c, uid in zip(rates, group.members)) if served else 0.0
        return GroupOutcome(group.gid, group.kind, total, total, served, None, None,
                            (0.0,) * len(group.members), sr, rates, scores)


def _mu_entropy(user, group: UserGroup, entropy: SemanticEntropy):
    """(mu_bits, entropy_suts) for the bit pipe equivalent of one user."""
    if group.kind == CONV_SINGLE:
        return MU_TEXT_BITS_PER_WORD, entropy.h_si
    if user.modality == "text":
        return MU_TEXT_BITS_PER_WORD, entropy.h_bi_t
    return MU_IMAGE_BITS_PER_IMAGE, entropy.h_bi_i


class SumSrUtilityModel:
    """Total fidelity-weighted S-rate with per-member rate floors (no QoE gate)."""

    label = "sum_sr"

    def __init__(self, scenario: Scenario, fidelity_single, fidelity_bimodal,
                 entropy: SemanticEntropy, single_solver=None, pair_solver=None):
        self.scenario = scenario
        self.entropy = entropy
        self.bandwidth_hz = scenario.config.bandwidth_hz
        need_single = any(g.kind == SEM_SINGLE for g in scenario.groups)
        need_pair = any(g.kind == SEM_PAIR for g in scenario.groups)
        if single_solver is None and need_single:
            single_solver = SrExhaustiveSolver(fidelity_single, entropy, self.bandwidth_hz)
        if pair_solver is None and need_pair:
            pair_solver = SrExhaustiveSolver(fidelity_bimodal, entropy, self.bandwidth_hz)
        self.single_solver = single_solver
        self.pair_solver = pair_solver

    def sr_state(self, group: UserGroup, gammas) -> SrState:
        users = [self.scenario.users[uid] for uid in group.members]
        kind = "bimodal" if group.is_pair else "single"
        return SrState(kind=kind, sinr_db=tuple(gamma_db_of(g) for g in gammas),
                       sr_reqs_suts_s=tuple(u.sr_req_suts_s for u in users))

    def _conv_sr(self, group: UserGroup, gammas):
        total = 0.0
        served = True
        for uid, g in zip(group.members, gammas):
            user = self.scenario.users[uid]
            c = conventional_bit_rate(g, self.bandwidth_hz)
            sr = equivalent_s_rate(c, *_mu_entropy(user, group, self.entropy))
            total += sr
            if sr < user.sr_req_suts_s:
                served = False
        return (total, True) if served else (0.0, False)

    def utility(self, group: UserGroup, gammas) -> float:
        if any(g <= 0.0 for g in gammas):
            return 0.0
        if group.is_semantic:
            solver = self.pair_solver if group.is_pair else self.single_solver
            return solver.solve(self.sr_state(group, gammas)).sr_total_suts_s / SR_UTILITY_SCALE
        return self._conv_sr(group, gammas)[0] / SR_UTILITY_SCALE

    def outcome(self, group: UserGroup, gammas) -> GroupOutcome:
        gammas = tuple(float(g) for g in gammas)
        rates = tuple(conventional_bit_rate(g, self.bandwidth_hz) if g > 0 else 0.0
                      for g in gammas)
        if any(g <= 0.0 for g in gammas):
            return GroupOutcome(group.gid, group.kind, 0.0, 0.0, False, None, None,
                                (0.0,) * len(group.members), 0.0, rates, ())
        if group.is_semantic:
            solver = self.pair_solver if group.is_pair else self.single_solver
            res = solver.solve(self.sr_state(group, gammas))
            return GroupOutcome(group.gid, group.kind,
                                res.sr_total_suts_s / SR_UTILITY_SCALE, 0.0, res.served,
                                res.action if res.served else None, None,
                                (0.0,) * len(group.members), res.sr_total_suts_s, rates, ())
        total, served = self._conv_sr(group, gammas)
        return GroupOutcome(group.gid, group.kind, total / SR_UTILITY_SCALE, 0.0, served,
                            None, None, (0.0,) * len(group.members), total, rates, ())


class BitRateUtilityModel:
    """Plain sum of Shannon rates; the conventional allocation objective."""

    label = "bit_rate"

    def __init__(self, scenario: Scenario, engine_quant_db: float | None = 0.5):
        self.scenario = scenario
        self.bandwidth_hz = scenario.config.bandwidth_hz
        self.engine_quant_db = engine_quant_db

    def utility(self, group: UserGroup, gammas) -> float:
        return sum(conventional_bit_rate(g, self.bandwidth_hz) if g > 0 else 0.0
                   for g in gammas) / BITRATE_UTILITY_SCALE

    def outcome(self, group: UserGroup, gammas) -> GroupOutcome:
        gammas = tuple(float(g) for g in gammas)
        rates = tuple(conventional_bit_rate(g, self.bandwidth_hz) if g > 0 else 0.0
                      for g in gammas)
        return GroupOutcome(group.gid, group.kind, sum(rates) / BITRATE_UTILITY_SCALE,
                            0.0, all(g > 0 for g in gammas), None, None,
                            (0.0,) * len(group.members), 0.0, rates, ())


class NetworkEvaluator:
    """Binds a scenario's SINR workspace to a utility model."""

    def __init__(self, scenario: Scenario, model, ignore_interference: bool = False):
        self.scenario = scenario
        self.model = model
        self.workspace = SinrWorkspace(scenario)
        self.ignore_interference = bool(ignore_interference)

    def gammas(self, chan: np.ndarray, pow_w: np.ndarray) -> np.ndarray:
        return self.workspace.sinr(chan, pow_w, self.ignore_interference)

    def member_gammas(self, group: UserGroup, gamma: np.ndarray) -> tuple:
        return tuple(float(gamma[uid]) for uid in group.members)

    def group_utility(self, group: UserGroup, gamma: np.ndarray) -> float:
        return self.model.utility(group, self.member_gammas(group, gamma))

    def total_utility(self, chan, pow_w) -> float:
        gamma = self.gammas(chan, pow_w)
        return sum(self.group_utility(g, gamma) for g in self.scenario.groups)

    def outcomes(self, chan, pow_w) -> dict:
        gamma = self.gammas(chan, pow_w)
        return {g.gid: self.model.outcome(g, self.member_gammas(g, gamma))
                for g in self.scenario.groups}


def make_qoe_model(scenario, fidelity_single, fidelity_bimodal, entropy, g_th,
                   cache_quant_db: float | None = 0.5, p1_solvers: dict | None = None):
    """Standard QoE model wiring: optional solver overrides, optional caching."""
    single = pair = None
    if p1_solvers:
        single = p1_solvers.get("single")
        pair = p1_solvers.get("bimodal")
    if single is None and fidelity_single is not None:
        single = ExhaustiveP1Solver(fidelity_single, entropy, scenario.config.bandwidth_hz)
    if pair is None and fidelity_bimodal is not None:
        pair = ExhaustiveP1Solver(fidelity_bimodal, entropy, scenario.config.bandwidth_hz)
    if cache_quant_db is not None:
        single = CachedSolver(single, cache_quant_db) if single is not None else None
        pair = CachedSolver(pair, cache_quant_db) if pair is not None else None
    model = QoeUtilityModel(scenario, fidelity_single, fidelity_bimodal, entropy, g_th,
                            single_solver=single, pair_solver=pair)
    # lets the matching engine memoise whole-group utilities on the same grid
    model.engine_quant_db = cache_quant_db
    return model


def make_sum_sr_model(scenario, fidelity_single, fidelity_bimodal, entropy,
                      cache_quant_db: float | None = 0.5):
    single = pair = None
    if fidelity_single is not None:
        single = SrExhaustiveSolver(fidelity_single, entropy, scenario.config.bandwidth_hz)
        if cache_quant_db is not None:
            single = CachedSolver(single, cache_quant_db)
    if fidelity_bimodal is not None:
        pair = SrExhaustiveSolver(fidelity_bimodal, entropy, scenario.config.bandwidth_hz)
        if cache_quant_db is not None:
            pair = CachedSolver(pair, cache_quant_db)
    model = SumSrUtilityModel(scenario, fidelity_single, fidelity_bimodal, entropy,
                              single_solver=single, pair_solver=pair)
    model.engine_quant_db = cache_quant_db
    return model
