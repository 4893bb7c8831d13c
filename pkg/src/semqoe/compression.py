"""Per-group compression selection: exhaustive scans, caching, and a DQN policy.

The compression subproblem fixes channels/powers (hence SINRs) and picks the
symbol budget k maximising the group's QoE subject to the serving gate; the
rate-objective variant maximises fidelity-weighted semantic rate instead.
Episodes in policy training are one-step: a random state, one action, the
exact reward, done; targets therefore equal the immediate reward.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import mlp
from .qoe import QoeParams, logistic_score, semantic_user_scores
from .rng import child_seed, substream
from .semantics import (BIMODAL, SINGLE, FidelityModel, MlpFidelityModel, SemanticEntropy,
                        TableFidelityModel, semantic_rate)


@dataclass(frozen=True)
class ActionCatalog:
    kind: str
    actions: tuple    # ints (single) or (k_t, k_i) pairs (bimodal), lexicographic

    def __post_init__(self):
        if self.kind not in (SINGLE, BIMODAL):
            raise ValueError(f"unknown catalog kind {self.kind!r}")
        if not self.actions:
            raise ValueError("catalog must not be empty")

    def __len__(self):
        return len(self.actions)


def default_catalog(model: FidelityModel) -> ActionCatalog:
    if model.kind == SINGLE:
        return ActionCatalog(SINGLE, tuple(model.k_grids[0]))
    return ActionCatalog(BIMODAL, tuple((kt, ki) for kt in model.k_grids[0]
                                        for ki in model.k_grids[1]))


@dataclass(frozen=True)
class P1State:
    kind: str
    sinr_db: tuple          # one entry per member (text first for pairs)
    params: tuple           # QoeParams per member
    g_th: float


@dataclass(frozen=True)
class P1Result:
    action_index: int
    action: object          # int or (k_t, k_i)
    qoe: float              # group QoE when served, else 0
    served: bool


@dataclass(frozen=True)
class ActionOutcome:
    qoe: float
    served: bool
    xi: float
    phi_suts_s: tuple       # per member
    scores: tuple           # UserScores per member


def _entropies_for(kind: str, entropy: SemanticEntropy) -> tuple:
    if kind == SINGLE:
        if entropy.h_si is None:
            raise ValueError("entropy record lacks h_si")
        return (entropy.h_si,)
    if entropy.h_bi_t is None or entropy.h_bi_i is None:
        raise ValueError("entropy record lacks bimodal entropies")
    return (entropy.h_bi_t, entropy.h_bi_i)


def evaluate_action(model: FidelityModel, entropy: SemanticEntropy, bandwidth_hz: float,
                    state: P1State, action) -> ActionOutcome:
    """Exact QoE of one compression choice at the state's SINRs."""
    hs = _entropies_for(state.kind, entropy)
    ks = (action,) if state.kind == SINGLE else tuple(action)
    xi = model.evaluate(action if state.kind == BIMODAL else ks[0], state.sinr_db
                        if state.kind == BIMODAL else state.sinr_db[0])
    phis = tuple(semantic_rate(h, k, bandwidth_hz) for h, k in zip(hs, ks))
    scores = tuple(semantic_user_scores(p, phi, xi)
                   for p, phi in zip(state.params, phis))
    served = all(s.rate_score >= state.g_th and s.acc_score >= state.g_th for s in scores)
    qoe = sum(s.score for s in scores) if served else 0.0
    return ActionOutcome(qoe=qoe, served=served, xi=xi, phi_suts_s=phis, scores=scores)


class ExhaustiveP1Solver:
    """Scans the whole catalog; table-backed models run through the kernel."""

    def __init__(self, model: FidelityModel, entropy: SemanticEntropy,
                 bandwidth_hz: float, catalog: ActionCatalog | None = None):
        self.model = model
        self.kind = model.kind
        self.entropy = entropy
        self.bandwidth_hz = float(bandwidth_hz)
        self.catalog = catalog if catalog is not None else default_catalog(model)
        if self.catalog.kind != self.kind:
            raise ValueError("catalog kind does not match model kind")
        hs = _entropies_for(self.kind, entropy)
        acts = self.catalog.actions
        if self.kind == SINGLE:
            self._phi_k = np.array([semantic_rate(hs[0], k, bandwidth_hz) / 1e3 for k in acts])
        else:
            self._phi_t = np.array([semantic_rate(hs[0], a[0], bandwidth_hz) / 1e3 for a in acts])
            self._phi_i = np.array([semantic_rate(hs[1], a[1], bandwidth_hz) / 1e3 for a in acts])
        self._fast = isinstance(model, TableFidelityModel)
        if self._fast:
            self._fid = np.ascontiguousarray(np.stack([model.sinr_profile(a) for a in acts]))
            self._sgrids = [np.asarray(g) for g in model.sinr_grids_db]

    def solve(self, state: P1State) -> P1Result:
        from . import _kernel
        if state.kind != self.kind:
            raise ValueError("state kind does not match solver kind")
        if self._fast:
            if self.kind == SINGLE:
                p = state.params[0]
                idx, reward, served = _kernel.p1_scan_single(
                    float(state.sinr_db[0]), p.weight, p.rate_growth,
                    p.rate_req_suts_s / 1e3, p.acc_growth, p.acc_req, state.g_th,
                    self._phi_k, self._fid, self._sgrids[0])
            else:
                pt, pi = state.params
                idx, reward, served = _kernel.p1_scan_bimodal(
                    float(state.sinr_db[0]), float(state.sinr_db[1]),
                    pt.weight, pt.rate_growth, pt.rate_req_suts_s / 1e3,
                    pt.acc_growth, pt.acc_req,
                    pi.weight, pi.rate_growth, pi.rate_req_suts_s / 1e3,
                    pi.acc_growth, pi.acc_req, state.g_th,
                    self._phi_t, self._phi_i, self._fid,
                    self._sgrids[0], self._sgrids[1])
            return P1Result(idx, self.catalog.actions[idx], reward, served)
        best = P1Result(0, self.catalog.actions[0], 0.0, False)
        best_r = 0.0
        for i, action in enumerate(self.catalog.actions):
            out = evaluate_action(self.model, self.entropy, self.bandwidth_hz, state, action)
            r = out.qoe if out.served else 0.0
            if r > best_r:
                best_r = r
                best = P1Result(i, action, r, out.served)
        return best


class CachedSolver:
    """Memoises a state solver on SINRs quantised to fixed dB buckets.

    The wrapped solver is called on the snapped state, so a bucket's value
    does not depend on which raw state populated it first.
    """

    def __init__(self, inner, quant_db: float = 0.5):
        if not (quant_db > 0):
            raise ValueError("quantisation step must be positive")
        self.inner = inner
        self.quant_db = float(quant_db)
        self.hits = 0
        self.misses = 0
        self._cache = {}

    def solve(self, state):
        q = self.quant_db
        key = replace(state, sinr_db=tuple(round(g / q) * q for g in state.sinr_db))
        got = self._cache.get(key)
        if got is not None:
            self.hits += 1
            return got
        self.misses += 1
        got = self.inner.solve(key)
        self._cache[key] = got
        return got

    @property
    def hit_rate(self) -> float:
        n = self.hits + self.misses
        return self.hits / n if n else 0.0


def solve_p1_exhaustive(state: P1State, model: FidelityModel, entropy: SemanticEntropy,
                        bandwidth_hz: float, catalog: ActionCatalog | None = None) -> P1Result:
    return ExhaustiveP1Solver(model, entropy, bandwidth_hz, catalog).solve(state)


# --- S-rate objective variant -------------------------------------------------

@dataclass(frozen=True)
class SrState:
    kind: str
    sinr_db: tuple
    sr_reqs_suts_s: tuple    # per member


@dataclass(frozen=True)
class SrResult:
    action_index: int
    action: object
    sr_total_suts_s: float
    served: bool


def _axis_weights(grid: np.ndarray, x: float):
    """Clamped linear-interp node pair and fraction, matching table lookups."""
    if x <= grid[0]:
        return 0, 0, 0.0
    if x >= grid[-1]:
        return len(grid) - 1, len(grid) - 1, 0.0
    j = int(np.searchsorted(grid, x, side="right")) - 1
    return j, j + 1, (x - grid[j]) / (grid[j + 1] - grid[j])


class SrExhaustiveSolver:
    """Maximises total fidelity-weighted S-rate with per-member rate floors."""

    def __init__(self, model: FidelityModel, entropy: SemanticEntropy,
                 bandwidth_hz: float, catalog: ActionCatalog | None = None):
        self.model = model
        self.kind = model.kind
        self.entropy = entropy
        self.bandwidth_hz = float(bandwidth_hz)
        self.catalog = catalog if catalog is not None else default_catalog(model)
        hs = _entropies_for(self.kind, entropy)
        acts = self.catalog.actions
        if self.kind == SINGLE:
            self._phi = np.array([semantic_rate(hs[0], k, bandwidth_hz) for k in acts])
        else:
            self._phi_t = np.array([semantic_rate(hs[0], a[0], bandwidth_hz) for a in acts])
            self._phi_i = np.array([semantic_rate(hs[1], a[1], bandwidth_hz) for a in acts])
        # whole-catalog table slices let one solve cost a few numpy ops instead
        # of a python interpolation per action; only exact-grid catalogs qualify
        table = getattr(model, "table", None)
        self._vals = None
        if table is not None and self._catalog_on_grid(model):
            self._vals = np.asarray(table.values, dtype=float)
            self._sg = [np.asarray(g, dtype=float) for g in model.sinr_grids_db]

    def _catalog_on_grid(self, model) -> bool:
        if self.kind == SINGLE:
            return tuple(self.catalog.actions) == tuple(model.k_grids[0])
        full = tuple((kt, ki) for kt in model.k_grids[0] for ki in model.k_grids[1])
        return tuple(self.catalog.actions) == full

    def _fidelity_profile(self, sinr_db) -> np.ndarray:
        """Fidelity of every catalog action at one SINR point (table models)."""
        if self.kind == SINGLE:
            j0, j1, t = _axis_weights(self._sg[0], float(sinr_db[0]))
            return self._vals[:, j0] * (1.0 - t) + self._vals[:, j1] * t
        i0, i1, u = _axis_weights(self._sg[1], float(sinr_db[1]))
        vi = self._vals[:, :, :, i0] * (1.0 - u) + self._vals[:, :, :, i1] * u
        j0, j1, t = _axis_weights(self._sg[0], float(sinr_db[0]))
        return (vi[:, :, j0] * (1.0 - t) + vi[:, :, j1] * t).ravel()

    def solve(self, state: SrState) -> SrResult:
        acts = self.catalog.actions
        if self._vals is not None:
            fid = self._fidelity_profile(state.sinr_db)
            if self.kind == SINGLE:
                total = self._phi * fid
                ok = total >= state.sr_reqs_suts_s[0]
            else:
                g_t = self._phi_t * fid
                g_i = self._phi_i * fid
                total = g_t + g_i
                ok = (g_t >= state.sr_reqs_suts_s[0]) & (g_i >= state.sr_reqs_suts_s[1])
            masked = np.where(ok, total, 0.0)
            i = int(np.argmax(masked))
            if masked[i] > 0.0:
                return SrResult(i, acts[i], float(masked[i]), True)
            return SrResult(0, acts[0], 0.0, False)
        if self.kind == SINGLE:
            g = state.sinr_db[0]
            req = state.sr_reqs_suts_s[0]
            best = SrResult(0, acts[0], 0.0, False)
            best_v = 0.0
            for i, k in enumerate(acts):
                gamma_total = self._phi[i] * self.model.evaluate(k, g)
                if gamma_total >= req and gamma_total > best_v:
                    best_v = gamma_total
                    best = SrResult(i, k, gamma_total, True)
            return best
        req_t, req_i = state.sr_reqs_suts_s
        best = SrResult(0, acts[0], 0.0, False)
        best_v = 0.0
        for i, a in enumerate(acts):
            xi = self.model.evaluate(a, state.sinr_db)
            g_t = self._phi_t[i] * xi
            g_i = self._phi_i[i] * xi
            if g_t >= req_t and g_i >= req_i and g_t + g_i > best_v:
                best_v = g_t + g_i
                best = SrResult(i, a, g_t + g_i, True)
        return best


# --- DQN policy ---------------------------------------------------------------

@dataclass(frozen=True)
class DqnConfig:
    episodes: int = 2000
    anneal_episodes: int = 1800        # epsilon 1 -> 0.02 linearly, then flat
    eps_start: float = 1.0
    eps_end: float = 0.02
    steps_per_episode: int = 10        # transitions collected per episode
    buffer_capacity: int = 50_000
    batch_size: int = 64
    target_sync_episodes: int = 200
    updates_per_step: int = 1          # minibatch updates after each transition
    warmup_transitions: int = 300
    hidden: tuple = (256, 256, 256)
    learning_rate: float | None = None  # per-kind default when None
    eval_every: int = 25
    eval_states: int = 400

    def epsilon(self, episode: int) -> float:
        if episode >= self.anneal_episodes:
            return self.eps_end
        span = self.eps_end - self.eps_start
        return self.eps_start + span * episode / self.anneal_episodes


DEFAULT_LEARNING_RATE = {SINGLE: 1e-4, BIMODAL: 5e-5}

# feature standardisation constants: uniform spans map to [0, 1], normal
# parameters map mean to 0.5 with +-4 sigma spanning the unit interval
_TEXT_GROWTH = (0.2, 0.05)
_IMAGE_GROWTH = (0.1, 0.02)
_ACC_GROWTH = (55.0, 2.5)
_TEXT_REQ_K = (50.0, 70.0)
_IMAGE_REQ_K = (80.0, 100.0)
_ACC_REQ = (0.8, 0.9)
_SINR_SPAN = (-10.0, 20.0)


def _norm_span(x, span):
    lo, hi = span
    return (x - lo) / (hi - lo)


def _norm_gauss(x, ms):
    mu, sd = ms
    return (x - mu) / (8.0 * sd) + 0.5


def _member_features(params: QoeParams, modality: str) -> list:
    growth_ms = _TEXT_GROWTH if modality == "text" else _IMAGE_GROWTH
    req_span = _TEXT_REQ_K if modality == "text" else _IMAGE_REQ_K
    return [params.weight,
            _norm_gauss(params.rate_growth, growth_ms),
            _norm_span(params.rate_req_suts_s / 1e3, req_span),
            _norm_gauss(params.acc_growth, _ACC_GROWTH),
            _norm_span(params.acc_req, _ACC_REQ)]


def state_features(state: P1State) -> np.ndarray:
    feats = [_norm_span(g, _SINR_SPAN) for g in state.sinr_db]
    if state.kind == SINGLE:
        feats += _member_features(state.params[0], "text")
    else:
        feats += _member_features(state.params[0], "text")
        feats += _member_features(state.params[1], "image")
    feats.append(state.g_th)
    return np.array(feats)


def feature_count(kind: str) -> int:
    return 7 if kind == SINGLE else 13


def sample_p1_state(kind: str, rng: np.random.Generator, g_th: float | None = None) -> P1State:
    """Random training/eval state matching the scenario parameter distributions.

    The serving threshold defaults to 0.5, the same default the network
    simulation uses, so policies train on the deployment distribution.
    """
    from .netmodel import draw_semantic_params
    if g_th is None:
        g_th = 0.5
    if kind == SINGLE:
        sinr = (float(rng.uniform(*_SINR_SPAN)),)
        params = (draw_semantic_params(rng, "text"),)
    else:
        sinr = (float(rng.uniform(*_SINR_SPAN)), float(rng.uniform(*_SINR_SPAN)))
        params = (draw_semantic_params(rng, "text"), draw_semantic_params(rng, "image"))
    return P1State(kind=kind, sinr_db=sinr, params=params, g_th=g_th)


@dataclass
class QPolicy:
    kind: str
    catalog: ActionCatalog
    eval_params: mlp.MlpParams
    target_params: mlp.MlpParams
    config: DqnConfig
    episodes_done: int = 0

    def q_values(self, state: P1State) -> np.ndarray:
        return mlp.forward(self.eval_params, state_features(state))

    def greedy_action(self, state: P1State) -> int:
        return int(np.argmax(self.q_values(state)))


class PolicyP1Solver:
    """Greedy action from the Q-network; QoE and serving evaluated exactly."""

    def __init__(self, policy: QPolicy, model: FidelityModel, entropy: SemanticEntropy,
                 bandwidth_hz: float):
        if policy.kind != model.kind:
            raise ValueError("policy and model kinds differ")
        self.policy = policy
        self.model = model
        self.entropy = entropy
        self.bandwidth_hz = float(bandwidth_hz)

    def solve(self, state: P1State) -> P1Result:
        idx = self.policy.greedy_action(state)
        action = self.policy.catalog.actions[idx]
        out = evaluate_action(self.model, self.entropy, self.bandwidth_hz, state, action)
        return P1Result(idx, action, out.qoe if out.served else 0.0, out.served)


def solve_p1_policy(state: P1State, policy: QPolicy, model: FidelityModel,
                    entropy: SemanticEntropy, bandwidth_hz: float) -> P1Result:
    return PolicyP1Solver(policy, model, entropy, bandwidth_hz).solve(state)


@dataclass(frozen=True)
class CurveRow:
    episode: int
    epsilon: float
    loss: float
    eval_ratio: float | None


class _Replay:
    def __init__(self, capacity: int, n_features: int):
        self.features = np.zeros((capacity, n_features))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.capacity = capacity
        self.size = 0
        self.head = 0

    def push(self, feats, action, reward):
        i = self.head
        self.features[i] = feats
        self.actions[i] = action
        self.rewards[i] = reward
        self.head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng, batch):
        idx = rng.integers(0, self.size, size=batch)
        return self.features[idx], self.actions[idx], self.rewards[idx]


def _policy_eval_ratio(policy: QPolicy, oracle: ExhaustiveP1Solver,
                       model, entropy, bandwidth_hz, states) -> float:
    got = 0.0
    opt = 0.0
    for s in states:
        idx = policy.greedy_action(s)
        out = evaluate_action(model, entropy, bandwidth_hz, s, policy.catalog.actions[idx])
        got += out.qoe if out.served else 0.0
        opt += oracle.solve(s).qoe
    return got / opt if opt > 0 else 1.0


def train_dqn(kind: str, model: FidelityModel, entropy: SemanticEntropy,
              bandwidth_hz: float, config: DqnConfig = DqnConfig(), seed: int = 0,
              catalog: ActionCatalog | None = None):
    """Train the compression policy; returns (QPolicy, list[CurveRow]).

    Each episode collects steps_per_episode transitions; a step samples a state,
    takes one epsilon-greedy action, observes the exact reward, and stores the
    transition as terminal (a compression decision is one-shot, so there is no
    successor state).  Q-targets are therefore the raw rewards; the target
    network is synchronised on schedule anyway so the plumbing matches the
    usual loop.  The returned policy is the checkpoint that scored best on the
    held-out validation states sampled inside this run.
    """
    if kind != model.kind:
        raise ValueError("model kind does not match requested policy kind")
    if config.steps_per_episode < 1 or config.updates_per_step < 0:
        raise ValueError("steps_per_episode must be >= 1 and updates_per_step >= 0")
    catalog = catalog if catalog is not None else default_catalog(model)
    n_actions = len(catalog)
    lr = config.learning_rate if config.learning_rate is not None else DEFAULT_LEARNING_RATE[kind]
    spec = mlp.MlpSpec((feature_count(kind),) + tuple(config.hidden) + (n_actions,),
                       hidden_activation="relu", output_activation="identity",
                       learning_rate=lr)
    rng_init = substream(seed, "dqn_init")
    rng_env = substream(seed, "dqn_env")
    rng_batch = substream(seed, "dqn_batch")
    rng_eval = substream(seed, "dqn_eval_states")

    eval_params = mlp.init_params(spec, rng_init)
    # zero output layer: untried actions start at the value baseline instead of
    # random noise, which otherwise attracts the argmax to unseen actions
    eval_params.weights[-1][:] = 0.0
    target_params = eval_params.copy()
    policy = QPolicy(kind=kind, catalog=catalog, eval_params=eval_params,
                     target_params=target_params, config=config)
    oracle = ExhaustiveP1Solver(model, entropy, bandwidth_hz, catalog)
    eval_states = [sample_p1_state(kind, rng_eval) for _ in range(config.eval_states)]
    eval_feats = np.array([state_features(s) for s in eval_states])
    eval_opt = sum(oracle.solve(s).qoe for s in eval_states)

    def current_ratio():
        q = mlp.forward(eval_params, eval_feats)
        got = 0.0
        for s, i in zip(eval_states, np.argmax(q, axis=1)):
            out = evaluate_action(model, entropy, bandwidth_hz, s, catalog.actions[int(i)])
            got += out.qoe if out.served else 0.0
        return got / eval_opt if eval_opt > 0 else 1.0

    replay = _Replay(config.buffer_capacity, feature_count(kind))
    curves = []
    last_loss = float("nan")
    best_ratio, best_params = -1.0, None
    for episode in range(config.episodes):
        eps = config.epsilon(episode)
        losses = []
        for _ in range(config.steps_per_episode):
            state = sample_p1_state(kind, rng_env)
            feats = state_features(state)
            if rng_env.uniform() < eps:
                action = int(rng_env.integers(0, n_actions))
            else:
                action = int(np.argmax(mlp.forward(eval_params, feats)))
            out = evaluate_action(model, entropy, bandwidth_hz, state, catalog.actions[action])
            reward = out.qoe if out.served else 0.0
            replay.push(feats, action, reward)

            if replay.size < max(config.warmup_transitions, config.batch_size):
                continue
            for _ in range(config.updates_per_step):
                bx, ba, br = replay.sample(rng_batch, config.batch_size)
                acts = mlp.forward_cached(eval_params, bx)
                q = acts[-1]
                chosen = q[np.arange(len(ba)), ba]
                td = chosen - br            # terminal transitions: target is the reward
                losses.append(float(np.mean(td ** 2)))
                d_out = np.zeros_like(q)
                d_out[np.arange(len(ba)), ba] = 2.0 * td / len(ba)
                grads_w, grads_b = mlp.backprop(eval_params, acts, d_out)
                mlp.adam_update(eval_params, grads_w, grads_b)
        if losses:
            last_loss = float(np.mean(losses))
            if not np.isfinite(last_loss):
                raise mlp.TrainingDivergedError(f"episode {episode}: loss {last_loss}")

        if (episode + 1) % config.target_sync_episodes == 0:
            policy.target_params = eval_params.copy()
        ratio = None
        if (episode + 1) % config.eval_every == 0 or episode + 1 == config.episodes:
            ratio = current_ratio()
            if ratio > best_ratio:
                best_ratio, best_params = ratio, eval_params.copy()
        curves.append(CurveRow(episode=episode, epsilon=eps, loss=last_loss, eval_ratio=ratio))
        policy.episodes_done = episode + 1
    # keep the checkpoint that scored best on the validation states
    if best_params is not None:
        policy.eval_params = best_params
    return policy, curves


def train_policy(kind: str, model: FidelityModel, entropy: SemanticEntropy,
                 bandwidth_hz: float, config: DqnConfig = DqnConfig(), seed: int = 0,
                 restarts: int = 3, selection_states: int = 1000,
                 catalog: ActionCatalog | None = None):
    """Best-of-restarts training: run train_dqn from several seeds and keep the
    policy with the highest exactly-evaluated QoE on a fresh selection set.

    The selection states are drawn from their own stream, so they overlap
    neither the per-run training/validation states nor any later test states.
    Returns (policy, curves_of_selected, selection_report).
    """
    catalog = catalog if catalog is not None else default_catalog(model)
    oracle = ExhaustiveP1Solver(model, entropy, bandwidth_hz, catalog)
    rng_sel = substream(seed, "dqn_select_" + kind)
    sel_states = [sample_p1_state(kind, rng_sel) for _ in range(selection_states)]
    sel_feats = np.array([state_features(s) for s in sel_states])
    sel_opt = sum(oracle.solve(s).qoe for s in sel_states)

    best = None
    report = []
    for i in range(restarts):
        run_seed = child_seed(seed, i) if restarts > 1 else seed
        policy, curves = train_dqn(kind, model, entropy, bandwidth_hz,
                                   config=config, seed=run_seed, catalog=catalog)
        q = mlp.forward(policy.eval_params, sel_feats)
        got = 0.0
        for s, a in zip(sel_states, np.argmax(q, axis=1)):
            out = evaluate_action(model, entropy, bandwidth_hz, s, catalog.actions[int(a)])
            got += out.qoe if out.served else 0.0
        ratio = got / sel_opt if sel_opt > 0 else 1.0
        report.append({"seed": run_seed, "selection_ratio": ratio})
        if best is None or ratio > best[0]:
            best = (ratio, policy, curves)
    return best[1], best[2], report


def save_policy(policy: QPolicy, path) -> None:
    data = {
        "schema": "semqoe.policy.v1",
        "kind": policy.kind,
        "actions": [list(a) if isinstance(a, tuple) else a for a in policy.catalog.actions],
        "eval_params": mlp.to_jsonable(policy.eval_params),
        "target_params": mlp.to_jsonable(policy.target_params),
        "config": {
            "episodes": policy.config.episodes,
            "anneal_episodes": policy.config.anneal_episodes,
            "eps_start": policy.config.eps_start,
            "eps_end": policy.config.eps_end,
            "steps_per_episode": policy.config.steps_per_episode,
            "buffer_capacity": policy.config.buffer_capacity,
            "batch_size": policy.config.batch_size,
            "target_sync_episodes": policy.config.target_sync_episodes,
            "updates_per_step": policy.config.updates_per_step,
            "warmup_transitions": policy.config.warmup_transitions,
            "hidden": list(policy.config.hidden),
            "learning_rate": policy.config.learning_rate,
            "eval_every": policy.config.eval_every,
            "eval_states": policy.config.eval_states,
        },
        "episodes_done": policy.episodes_done,
    }
    with open(path, "w") as fh:
        json.dump(data, fh)


def load_policy(path) -> QPolicy:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("schema") != "semqoe.policy.v1":
        raise ValueError(f"unknown policy schema {data.get('schema')!r}")
    kind = data["kind"]
    actions = tuple(tuple(a) if isinstance(a, list) else a for a in data["actions"])
    cfg = dict(data["config"])
    cfg["hidden"] = tuple(cfg["hidden"])
    return QPolicy(kind=kind, catalog=ActionCatalog(kind, actions),
                   eval_params=mlp.from_jsonable(data["eval_params"]),
                   target_params=mlp.from_jsonable(data["target_params"]),
                   config=DqnConfig(**cfg), episodes_done=int(data["episodes_done"]))
