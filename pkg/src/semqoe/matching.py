"""Many-to-one swap matching of channels and powers with externalities.

Each cell pads its own side: fewer users than channels adds virtual users
(Case 1), more users than channels adds virtual channels (Case 2).  A swap
moves one player to a candidate resource; displaced holders receive the
released channels (lexicographically matched) keeping their powers.  A swap is
applied when every affected same-cell party weakly improves, someone strictly
improves (player utilities in Case 1, channel utilities in Case 2) and the
coalition value of all touched groups, interferers included, strictly rises.
First-improvement scanning repeats until a full pass stays quiet.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .evaluate import NetworkEvaluator
from .netmodel import Scenario, VIRTUAL, ConfigError
from .rng import substream
from .units import dbm_to_watts


class ConvergenceError(RuntimeError):
    """Swap budget exhausted before the matching stabilised."""


@dataclass(frozen=True)
class Resource:
    channels: tuple          # local channel ids, ascending for pair candidates
    powers_dbm: tuple        # aligned with channels; None for virtual players

    def __post_init__(self):
        if len(self.channels) != len(self.powers_dbm):
            raise ValueError("channels and powers must align")


@dataclass(frozen=True)
class Player:
    key: tuple               # ("g", gid) or ("v", cell, index)
    cell: int
    kind: str                # group kind or "virtual"
    gid: int | None
    members: tuple           # uids, empty for virtual users

    @property
    def is_virtual(self) -> bool:
        return self.kind == VIRTUAL

    @property
    def is_pair(self) -> bool:
        return len(self.members) == 2

    @property
    def slots(self) -> int:
        return 2 if self.is_pair else 1


@dataclass
class CellState:
    cell: int
    case: int                          # 1: virtual users, 2: virtual channels
    real_channels: int                 # |M|
    channels: tuple                    # local ids 0..M_A-1; >= real_channels virtual
    players: tuple                     # pairs first, then singles, then virtual users
    assign: dict = field(default_factory=dict)    # key -> Resource
    holder: dict = field(default_factory=dict)    # channel -> (key, slot)

    def rebuild_holder(self):
        self.holder = {}
        for p in self.players:
            res = self.assign[p.key]
            for slot, c in enumerate(res.channels):
                if c in self.holder:
                    raise ConfigError(f"channel {c} held twice in cell {self.cell}")
                self.holder[c] = (p.key, slot)
        if set(self.holder) != set(self.channels):
            raise ConfigError(f"cell {self.cell} channel cover broken")


@dataclass
class Matching:
    cells: dict                        # cell -> CellState
    swap_count: int = 0
    search_count: int = 0

    def player(self, key):
        return self._players()[key]

    def _players(self):
        idx = getattr(self, "_player_index", None)
        if idx is None:
            idx = {p.key: p for cs in self.cells.values() for p in cs.players}
            self._player_index = idx
        return idx

    def to_user_arrays(self, scenario: Scenario):
        """Per-user channel (-1 silent) and transmit power in watts.

        A pair transmits only when both its channels are real; a player parked
        on any virtual channel is silent.
        """
        u_count = len(scenario.users)
        chan = np.full(u_count, -1, dtype=np.int32)
        pow_w = np.zeros(u_count)
        for cs in self.cells.values():
            for p in cs.players:
                if p.is_virtual:
                    continue
                res = cs.assign[p.key]
                if any(c >= cs.real_channels for c in res.channels):
                    continue
                for slot, uid in enumerate(p.members):
                    chan[uid] = res.channels[slot]
                    pow_w[uid] = dbm_to_watts(res.powers_dbm[slot])
        return chan, pow_w


@dataclass(frozen=True)
class EngineConfig:
    delta: float = 1e-9               # strict coalition improvement margin
    max_swaps: int = 1_000_000
    max_passes: int = 10_000
    init_seed: int | None = None      # defaults to the scenario seed


@dataclass(frozen=True)
class TraceRow:
    swap_index: int
    pass_index: int
    cell: int
    player: str
    searches: int
    total_utility: float


@dataclass
class MatchingTrace:
    rows: list = field(default_factory=list)
    pass_cell_searches: list = field(default_factory=list)   # per pass: {cell: count}
    converged: bool = False
    passes: int = 0
    wall_time_s: float = 0.0


def build_players(scenario: Scenario, cell: int) -> tuple:
    """Real groups of the cell (pairs first) plus virtual-user padding for Case 1."""
    players = []
    for g in scenario.cell_groups(cell):
        players.append(Player(key=("g", g.gid), cell=cell, kind=g.kind,
                              gid=g.gid, members=tuple(g.members)))
    return tuple(players)


def _build_matching(scenario: Scenario, rng, random_powers: bool) -> Matching:
    m = scenario.config.channels
    levels = scenario.config.power_levels_dbm
    cells = {}
    for cell in range(scenario.config.cells):
        players = list(build_players(scenario, cell))
        demand = sum(p.slots for p in players)
        if demand <= m:
            case = 1
            channels = tuple(range(m))
            for i in range(m - demand):
                players.append(Player(key=("v", cell, i), cell=cell, kind=VIRTUAL,
                                      gid=None, members=()))
        else:
            case = 2
            channels = tuple(range(demand))
        cs = CellState(cell=cell, case=case, real_channels=m,
                       channels=channels, players=tuple(players))
        perm = [int(c) for c in rng.permutation(len(channels))]
        cursor = 0
        for p in cs.players:
            take = perm[cursor:cursor + p.slots]
            cursor += p.slots
            if p.is_virtual:
                cs.assign[p.key] = Resource((take[0],), (None,))
                continue
            if random_powers:
                powers = tuple(levels[int(i)] for i in rng.integers(0, len(levels), p.slots))
            else:
                powers = (levels[0],) * p.slots
            if p.is_pair:
                lo, hi = sorted(take)
                cs.assign[p.key] = Resource((lo, hi), powers)
            else:
                cs.assign[p.key] = Resource((take[0],), powers)
        cs.rebuild_holder()
        cells[cell] = cs
    return Matching(cells=cells)


def init_matching(scenario: Scenario, seed: int | None = None) -> Matching:
    """Seed-deterministic start: permuted channels, everyone at minimum power."""
    if seed is None:
        seed = scenario.seed
    return _build_matching(scenario, substream(seed, "matching_init"), random_powers=False)


def candidate_resources(cs: CellState, player: Player, power_levels: tuple):
    """Deterministic candidate order: channels ascending, then powers ascending."""
    if player.is_virtual:
        for c in cs.channels:
            yield Resource((c,), (None,))
    elif player.is_pair:
        for lo, hi in itertools.combinations(cs.channels, 2):
            for pt in power_levels:
                for pi in power_levels:
                    yield Resource((lo, hi), (pt, pi))
    else:
        for c in cs.channels:
            for p in power_levels:
                yield Resource((c,), (p,))


def complexity_bound(n_single_like: int, n_pairs: int, m_a: int, p: int) -> int:
    """Per-pass per-cell search ceiling for the candidate enumeration."""
    pairs_m = m_a * (m_a - 1) // 2
    return n_single_like * m_a * p + n_pairs * pairs_m * p * p


class _Engine:
    def __init__(self, scenario: Scenario, model, config: EngineConfig,
                 matching: Matching | None = None,
                 ignore_interference: bool = False):
        self.scenario = scenario
        self.model = model
        self.config = config
        self.evaluator = NetworkEvaluator(scenario, model, ignore_interference)
        self.matching = matching if matching is not None else init_matching(
            scenario, config.init_seed)
        self.power_levels = scenario.config.power_levels_dbm
        self.groups_by_gid = {g.gid: g for g in scenario.groups}
        self.chan, self.pow_w = self.matching.to_user_arrays(scenario)
        self.gamma = self.evaluator.gammas(self.chan, self.pow_w)
        # engine view: utilities memoised at SINRs snapped to the solver-cache
        # grid, so repeated checks and the stability audit agree bit for bit
        self.quant = getattr(model, "engine_quant_db", None)
        self._ucache = {}
        self._pre_cache = {}
        self._players_by_key = {p.key: p for cs in self.matching.cells.values()
                                for p in cs.players}
        self._watts = {lvl: dbm_to_watts(lvl) for lvl in self.power_levels}
        n = len(scenario.users)
        self._chan_buf = np.empty(n, dtype=self.chan.dtype)
        self._pow_buf = np.empty(n)

    # -- utilities under the engine's (possibly quantised) view ---------------

    def _utility_cached(self, group, gamma) -> float:
        m = group.members
        if len(m) == 1:
            gs = (float(gamma[m[0]]),)
        else:
            gs = (float(gamma[m[0]]), float(gamma[m[1]]))
        if self.quant is None:
            return self.model.utility(group, gs)
        if gs[0] <= 0.0 or (len(gs) == 2 and gs[1] <= 0.0):
            # silence is joint per group, so the exact value is just 0
            return 0.0 if all(g <= 0.0 for g in gs) else self.model.utility(group, gs)
        q = self.quant
        key = (group.gid, tuple(round(10.0 * math.log10(g) / q) for g in gs))
        val = self._ucache.get(key)
        if val is None:
            snapped = tuple(10.0 ** (s * q / 10.0) for s in key[1])
            val = self.model.utility(group, snapped)
            self._ucache[key] = val
        return val

    def _mover_utility(self, key, gamma) -> float:
        if key[0] == "v":
            return 0.0
        return self._utility_cached(self.groups_by_gid[key[1]], gamma)

    def _pre_utility(self, key) -> float:
        # current-state utilities are constant between applied swaps
        val = self._pre_cache.get(key)
        if val is None:
            val = self._mover_utility(key, self.gamma)
            self._pre_cache[key] = val
        return val

    def _pre_group_utility(self, group) -> float:
        val = self._pre_cache.get(group.gid)
        if val is None:
            val = self._utility_cached(group, self.gamma)
            self._pre_cache[group.gid] = val
        return val

    def total_utility(self) -> float:
        return sum(self._utility_cached(g, self.gamma) for g in self.scenario.groups)

    # -- swap mechanics -------------------------------------------------------

    def _displacement_plan(self, cs: CellState, key, new_res: Resource):
        old = cs.assign[key]
        old_set = set(old.channels)
        new_set = set(new_res.channels)
        released = sorted(old_set - new_set)
        incoming = sorted(new_set - old_set)
        plan = {key: new_res}
        pending = {}
        for got, lost_holder_chan in zip(released, incoming):
            hk, slot = cs.holder[lost_holder_chan]
            pending.setdefault(hk, []).append((slot, got))
        for hk, updates in pending.items():
            res = cs.assign[hk]
            channels = list(res.channels)
            for slot, c in updates:
                channels[slot] = c
            plan[hk] = Resource(tuple(channels), res.powers_dbm)
        return plan

    def _scratch_arrays(self, cs: CellState, plan):
        chan = self._chan_buf
        pow_w = self._pow_buf
        np.copyto(chan, self.chan)
        np.copyto(pow_w, self.pow_w)
        for key, res in plan.items():
            if key[0] == "v":
                continue
            player = self._players_by_key[key]
            silent = False
            for c in res.channels:
                if c >= cs.real_channels:
                    silent = True
                    break
            for slot, uid in enumerate(player.members):
                if silent:
                    chan[uid] = -1
                    pow_w[uid] = 0.0
                else:
                    chan[uid] = res.channels[slot]
                    pow_w[uid] = self._watts[res.powers_dbm[slot]]
        return chan, pow_w

    def _affected_other_groups(self, cs: CellState, touched_real):
        out = []
        for g in self.scenario.groups:
            if g.cell == cs.cell:
                continue
            for uid in g.members:
                if self.chan[uid] in touched_real:
                    out.append(g)
                    break
        return out

    @staticmethod
    def _channel_value(c, holder_map, utils, cs, players):
        if c >= cs.real_channels:
            return 0.0
        key = holder_map[c]
        u = utils[key]
        return u / 2.0 if players[key].is_pair else u

    def check_blocking(self, cs: CellState, player: Player, new_res: Resource):
        """Evaluate one candidate; returns (is_blocking, plan, post arrays).

        Staged: the same-cell acceptance conditions run first, the other-cell
        coalition terms only for candidates that survive them.
        """
        plan = self._displacement_plan(cs, player.key, new_res)
        movers = list(plan.keys())
        chan2, pow2 = self._scratch_arrays(cs, plan)
        gamma2 = self.evaluator.gammas(chan2, pow2)
        pre_u = {k: self._pre_utility(k) for k in movers}
        post_u = {k: self._mover_utility(k, gamma2) for k in movers}

        if cs.case == 1:
            weak = all(post_u[k] >= pre_u[k] for k in movers)
            strict = any(post_u[k] > pre_u[k] for k in movers)
        else:
            players = self._players_by_key
            chans = sorted({c for k in movers for c in cs.assign[k].channels})
            post_holder = {c: k for k in movers for c in plan[k].channels}
            pre_holder = {c: cs.holder[c][0] for c in chans}
            pre_vals = [self._channel_value(c, pre_holder, pre_u, cs, players) for c in chans]
            post_vals = [self._channel_value(c, post_holder, post_u, cs, players) for c in chans]
            weak = all(b >= a for a, b in zip(pre_vals, post_vals))
            strict = any(b > a for a, b in zip(pre_vals, post_vals))
        if not (weak and strict):
            return False, plan, None
        old = cs.assign[player.key]
        touched_real = {c for c in set(old.channels) | set(new_res.channels)
                        if c < cs.real_channels}
        dv = sum(post_u.values()) - sum(pre_u.values())
        for g in self._affected_other_groups(cs, touched_real):
            dv += self._utility_cached(g, gamma2) - self._pre_group_utility(g)
        if dv <= self.config.delta:
            return False, plan, None
        return True, plan, (chan2.copy(), pow2.copy(), gamma2)

    def apply_plan(self, cs: CellState, plan, post):
        for key, res in plan.items():
            cs.assign[key] = res
        cs.rebuild_holder()
        self.chan, self.pow_w, self.gamma = post
        self._pre_cache.clear()

    # -- scanning -------------------------------------------------------------

    def run(self) -> MatchingTrace:
        trace = MatchingTrace()
        t0 = time.perf_counter()
        trace.rows.append(TraceRow(0, 0, -1, "", 0, self.total_utility()))
        for pass_idx in range(self.config.max_passes):
            counters = {cell: 0 for cell in self.matching.cells}
            improved = False
            for cell, cs in self.matching.cells.items():
                for player in cs.players:
                    current = cs.assign[player.key]
                    for cand in candidate_resources(cs, player, self.power_levels):
                        if cand == current:
                            continue
                        counters[cell] += 1
                        self.matching.search_count += 1
                        ok, plan, post = self.check_blocking(cs, player, cand)
                        if not ok:
                            continue
                        self.apply_plan(cs, plan, post)
                        self.matching.swap_count += 1
                        if self.matching.swap_count > self.config.max_swaps:
                            raise ConvergenceError(
                                f"no convergence within {self.config.max_swaps} swaps")
                        trace.rows.append(TraceRow(self.matching.swap_count, pass_idx,
                                                   cell, str(player.key),
                                                   self.matching.search_count,
                                                   self.total_utility()))
                        improved = True
                        break
            trace.pass_cell_searches.append(counters)
            trace.passes = pass_idx + 1
            if not improved:
                trace.converged = True
                break
        if not trace.converged:
            raise ConvergenceError(f"no convergence within {self.config.max_passes} passes")
        trace.wall_time_s = time.perf_counter() - t0
        return trace

    def scan_blocking(self) -> list:
        """Exhaustive blocking-swap scan without applying anything."""
        found = []
        for cell, cs in self.matching.cells.items():
            for player in cs.players:
                current = cs.assign[player.key]
                for cand in candidate_resources(cs, player, self.power_levels):
                    if cand == current:
                        continue
                    ok, _, _ = self.check_blocking(cs, player, cand)
                    if ok:
                        found.append(f"cell {cell} player {player.key} -> "
                                     f"channels {cand.channels} powers {cand.powers_dbm}")
        return found


def run_matching(scenario: Scenario, model, config: EngineConfig = EngineConfig(),
                 ignore_interference: bool = False):
    """Swap-match until stable; returns (Matching, MatchingTrace)."""
    eng = _Engine(scenario, model, config, ignore_interference=ignore_interference)
    trace = eng.run()
    return eng.matching, trace


def audit_stability(scenario: Scenario, matching: Matching, model,
                    config: EngineConfig = EngineConfig(),
                    ignore_interference: bool = False) -> list:
    """All blocking swaps of a finished matching; empty means pairwise stable."""
    eng = _Engine(scenario, model, config, matching=matching,
                  ignore_interference=ignore_interference)
    return eng.scan_blocking()


def audit_constraints(scenario: Scenario, matching: Matching, model,
                      solution_groups=None) -> list:
    """Constraint checks C1-C7; empty means clean.

    C1 assignment validity (every holder consistent, channels in range),
    C2 orthogonal channels within a cell, C3 at most one channel per user,
    C4 pairs hold no channel or two, C5 compression on its grid,
    C6 powers on the configured grid and under the cap, C7 serving gate.
    solution_groups, when given, are reporting dicts (gid, action, served)
    whose recorded choices are re-checked against C5/C7.
    """
    issues = []
    cfg = scenario.config
    levels = set(cfg.power_levels_dbm)
    for cell, cs in matching.cells.items():
        try:
            cs.rebuild_holder()
        except ConfigError as e:
            issues.append(f"C1: {e}")
            continue
        demand = sum(p.slots for p in cs.players)
        if len(cs.channels) != demand:
            issues.append(f"C1: cell {cell}: channel padding does not match slot demand")
        for p in cs.players:
            res = cs.assign.get(p.key)
            if res is None:
                issues.append(f"C1: cell {cell}: player {p.key} unassigned")
                continue
            if len(res.channels) != p.slots:
                cid = "C4" if p.is_pair else "C3"
                issues.append(f"{cid}: cell {cell}: player {p.key} holds "
                              f"{len(res.channels)} channels, expected {p.slots}")
            if len(set(res.channels)) != len(res.channels):
                issues.append(f"C3: cell {cell}: player {p.key} repeats a channel")
            if p.is_virtual:
                continue
            for c, pw in zip(res.channels, res.powers_dbm):
                if c < cs.real_channels:
                    if pw not in levels:
                        issues.append(f"C6: cell {cell}: player {p.key} power {pw} off-grid")
                    elif pw > cfg.max_power_dbm:
                        issues.append(f"C6: cell {cell}: player {p.key} power above cap")
    chan, pow_w = matching.to_user_arrays(scenario)
    for cell in range(cfg.cells):
        seen = {}
        for uid, c in enumerate(chan):
            if c >= 0 and scenario.users[uid].cell == cell:
                if c >= cfg.channels:
                    issues.append(f"C1: user {uid} on nonexistent channel {c}")
                if c in seen:
                    issues.append(f"C2: cell {cell}: users {seen[c]} and {uid} "
                                  f"share channel {c}")
                seen[c] = uid
    # C4 both-or-none at user level: a transmitting pair member implies its partner
    for g in scenario.groups:
        if len(g.members) == 2:
            a, b = g.members
            if (chan[a] >= 0) != (chan[b] >= 0):
                issues.append(f"C4: pair {g.gid} has exactly one transmitting member")
    evaluator = NetworkEvaluator(scenario, model)
    gamma = evaluator.gammas(chan, pow_w)
    outcomes = {g.gid: model.outcome(g, evaluator.member_gammas(g, gamma))
                for g in scenario.groups}
    g_th = getattr(model, "g_th", None)
    for g in scenario.groups:
        out = outcomes[g.gid]
        if out.utility > 0 and not out.served:
            issues.append(f"C7: group {g.gid}: positive utility while unserved")
        if out.served and g_th is not None and out.scores:
            for uid, s in zip(g.members, out.scores):
                comps = (s.rate_score, s.acc_score) if hasattr(s, "rate_score") else (s,)
                for c in comps:
                    if c < g_th:
                        issues.append(f"C7: user {uid}: served but score {c:.3f} "
                                      f"below threshold {g_th}")
    if solution_groups is not None:
        issues.extend(_audit_solution_groups(scenario, model, evaluator, gamma,
                                             solution_groups))
    return issues


def _audit_solution_groups(scenario, model, evaluator, gamma, solution_groups) -> list:
    """Re-check recorded compression choices and served flags (C5, C7)."""
    from .compression import evaluate_action
    from .semantics import KOutOfGridError
    issues = []
    groups = {g.gid: g for g in scenario.groups}
    for rec in solution_groups:
        g = groups.get(rec["gid"])
        if g is None:
            issues.append(f"C1: solution names unknown group {rec['gid']}")
            continue
        if not g.is_semantic or rec.get("action") is None:
            continue
        action = rec["action"]
        if isinstance(action, list):
            action = tuple(action)
        fid = model.fidelity_bimodal if g.is_pair else model.fidelity_single
        gs = evaluator.member_gammas(g, gamma)
        if any(x <= 0 for x in gs):
            if rec.get("served"):
                issues.append(f"C7: group {g.gid} reported served without a channel")
            continue
        try:
            out = evaluate_action(fid, model.entropy, model.bandwidth_hz,
                                  model.p1_state(g, gs), action)
        except KOutOfGridError as e:
            issues.append(f"C5: group {g.gid}: {e}")
            continue
        if bool(rec.get("served")) != out.served:
            issues.append(f"C7: group {g.gid} reported served={rec.get('served')} "
                          f"but gate evaluates to {out.served}")
    return issues


def matching_to_jsonable(matching: Matching) -> dict:
    cells = []
    for cell, cs in sorted(matching.cells.items()):
        players = []
        for p in cs.players:
            res = cs.assign[p.key]
            players.append({"key": list(p.key), "kind": p.kind, "gid": p.gid,
                            "members": list(p.members),
                            "channels": list(res.channels),
                            "powers_dbm": list(res.powers_dbm)})
        cells.append({"cell": cell, "case": cs.case, "real_channels": cs.real_channels,
                      "channels": list(cs.channels), "players": players})
    return {"schema": "semqoe.matching.v1", "cells": cells,
            "swap_count": matching.swap_count, "search_count": matching.search_count}


def matching_from_jsonable(data: dict) -> Matching:
    if data.get("schema") != "semqoe.matching.v1":
        raise ConfigError(f"unknown matching schema {data.get('schema')!r}")
    cells = {}
    for c in data["cells"]:
        players = []
        assign = {}
        for p in c["players"]:
            key = tuple(p["key"])
            players.append(Player(key=key, cell=c["cell"], kind=p["kind"],
                                  gid=p["gid"], members=tuple(p["members"])))
            assign[key] = Resource(tuple(p["channels"]),
                                   tuple(None if pw is None else float(pw)
                                         for pw in p["powers_dbm"]))
        cs = CellState(cell=c["cell"], case=c["case"], real_channels=c["real_channels"],
                       channels=tuple(c["channels"]), players=tuple(players), assign=assign)
        cs.rebuild_holder()
        cells[c["cell"]] = cs
    return Matching(cells=cells, swap_count=int(data["swap_count"]),
                    search_count=int(data["search_count"]))


def complexity_report(matching: Matching, trace: MatchingTrace, scenario: Scenario) -> dict:
    """Observed per-pass per-cell searches against the enumeration ceiling."""
    p = len(scenario.config.power_levels_dbm)
    bounds = {}
    for cell, cs in matching.cells.items():
        n_pairs = sum(1 for pl in cs.players if pl.is_pair)
        n_single_like = sum(1 for pl in cs.players if not pl.is_pair)
        bounds[cell] = complexity_bound(n_single_like, n_pairs, len(cs.channels), p)
    rows = []
    ok = True
    for pass_idx, counters in enumerate(trace.pass_cell_searches):
        for cell, count in counters.items():
            within = count <= bounds[cell]
            ok = ok and within
            rows.append({"pass": pass_idx, "cell": cell, "searches": count,
                         "bound": bounds[cell], "within": within})
    return {"rows": rows, "bounds": bounds, "all_within": ok,
            "total_searches": matching.search_count, "swaps": matching.swap_count}
