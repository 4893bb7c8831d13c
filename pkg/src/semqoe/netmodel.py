"""Multi-cell uplink model: topology, user drops, channels, MRC and SINR.

Cells share the channel set, so a channel reused in another cell interferes;
within a cell channels are orthogonal.  Receive combining is MRC, which turns
the SINR of user u on channel m into

    gamma = p * ||h||^4 / (||h||^2 * sigma^2 * W + sum_v p_v * |h^H h_v|^2)

with the interferer sum over same-channel users of other cells.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict, field

import numpy as np

from . import _kernel
from .qoe import ConvQoeParams, QoeParams
from .rng import substream
from .units import dbm_to_watts

TEXT = "text"
IMAGE = "image"

SEM_SINGLE = "semantic_single"
SEM_PAIR = "semantic_pair"
CONV_SINGLE = "conventional_single"
CONV_PAIR = "conventional_pair"
VIRTUAL = "virtual"

PAIR_KINDS = (SEM_PAIR, CONV_PAIR)
SEMANTIC_KINDS = (SEM_SINGLE, SEM_PAIR)


class ConfigError(ValueError):
    """Invalid scenario or run configuration."""


@dataclass(frozen=True)
class ScenarioConfig:
    cells: int = 3
    cell_radius_m: float = 500.0
    rx_antennas: int = 2
    channels: int = 6
    bandwidth_hz: float = 180e3
    noise_psd_dbm_hz: float = -174.0
    power_levels_dbm: tuple = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    n_sem_single: int = 6        # network-wide group counts
    n_sem_pair: int = 6
    n_conv_single: int = 0
    n_conv_pair: int = 0
    min_bs_dist_m: float = 10.0

    def __post_init__(self):
        if self.cells < 1:
            raise ConfigError("need at least one cell")
        if self.cell_radius_m <= 0:
            raise ConfigError("cell radius must be positive")
        if self.rx_antennas < 1:
            raise ConfigError("need at least one receive antenna")
        if self.channels < 1:
            raise ConfigError("need at least one channel")
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth must be positive")
        levels = tuple(float(p) for p in self.power_levels_dbm)
        if len(levels) < 1 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ConfigError("power levels must be strictly ascending")
        object.__setattr__(self, "power_levels_dbm", levels)
        for name in ("n_sem_single", "n_sem_pair", "n_conv_single", "n_conv_pair"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.n_sem_single + self.n_sem_pair + self.n_conv_single + self.n_conv_pair == 0:
            raise ConfigError("scenario needs at least one group")
        if not (0 < self.min_bs_dist_m < self.cell_radius_m):
            raise ConfigError("min BS distance must lie in (0, cell_radius)")

    @property
    def max_power_dbm(self) -> float:
        return self.power_levels_dbm[-1]


@dataclass(frozen=True)
class User:
    uid: int
    cell: int
    modality: str                      # text | image
    system: str                        # semantic | conventional
    position_m: tuple
    qoe: QoeParams | None              # semantic users only
    conv_qoe: ConvQoeParams | None     # conventional users only
    sr_req_suts_s: float               # S-rate requirement for rate-objective runs


@dataclass(frozen=True)
class UserGroup:
    gid: int
    cell: int
    kind: str
    members: tuple                     # uids; pairs ordered (text, image)

    @property
    def is_pair(self) -> bool:
        return self.kind in PAIR_KINDS

    @property
    def is_semantic(self) -> bool:
        return self.kind in SEMANTIC_KINDS


@dataclass
class Scenario:
    config: ScenarioConfig
    seed: int
    bs_positions_m: np.ndarray         # (B, 2)
    users: tuple                       # tuple[User]
    groups: tuple                      # tuple[UserGroup]
    pathloss_db: np.ndarray            # (U, B)
    shadowing_db: np.ndarray           # (U, B)
    gains: np.ndarray                  # complex (U, B, M, N_r)
    _cell_groups: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        u = len(self.users)
        b = self.config.cells
        m = self.config.channels
        if self.gains.shape != (u, b, m, self.config.rx_antennas):
            raise ConfigError("channel gain tensor shape mismatch")
        if self.pathloss_db.shape != (u, b) or self.shadowing_db.shape != (u, b):
            raise ConfigError("pathloss/shadowing shape mismatch")
        for g in self.groups:
            for uid in g.members:
                if self.users[uid].cell != g.cell:
                    raise ConfigError("group member in a different cell")

    def user(self, uid: int) -> User:
        return self.users[uid]

    def cell_groups(self, cell: int) -> list:
        """Groups of one cell, pairs first then singles, ascending gid within each."""
        if cell not in self._cell_groups:
            mine = [g for g in self.groups if g.cell == cell]
            self._cell_groups[cell] = (sorted([g for g in mine if g.is_pair], key=lambda g: g.gid)
                                       + sorted([g for g in mine if not g.is_pair], key=lambda g: g.gid))
        return self._cell_groups[cell]

    def cell_user_count(self, cell: int) -> int:
        return sum(len(g.members) for g in self.cell_groups(cell))

    @property
    def noise_watts(self) -> float:
        return float(dbm_to_watts(self.config.noise_psd_dbm_hz)) * self.config.bandwidth_hz


def bs_layout(cells: int, cell_radius_m: float) -> np.ndarray:
    """Single cell at the origin; otherwise a ring making neighbouring discs tangent."""
    if cells == 1:
        return np.zeros((1, 2))
    ring = cell_radius_m / math.sin(math.pi / cells)
    ang = 2.0 * math.pi * np.arange(cells) / cells
    return np.column_stack([ring * np.cos(ang), ring * np.sin(ang)])


def pathloss_db_at(distance_m: float) -> float:
    """3GPP-style urban macro loss, distance in metres."""
    return 128.1 + 37.6 * math.log10(distance_m / 1000.0)


def mrc_detector(h: np.ndarray) -> np.ndarray:
    """MRC combining row vector w = h^H for a column channel h."""
    h = np.asarray(h)
    if h.ndim != 1 or h.size == 0:
        raise ValueError("channel must be a nonempty vector")
    if not np.any(h != 0):
        raise ValueError("cannot combine an all-zero channel")
    return np.conj(h)


def draw_semantic_params(rng: np.random.Generator, modality: str) -> QoeParams:
    w = float(rng.uniform(0.0, 1.0))
    if modality == TEXT:
        growth = max(float(rng.normal(0.2, 0.05)), 1e-3)
        req = float(rng.uniform(50e3, 70e3))
    else:
        growth = max(float(rng.normal(0.1, 0.02)), 1e-3)
        req = float(rng.uniform(80e3, 100e3))
    lam = max(float(rng.normal(55.0, 2.5)), 1e-3)
    xi_req = float(rng.uniform(0.8, 0.9))
    return QoeParams(weight=w, rate_growth=growth, rate_req_suts_s=req,
                     acc_growth=lam, acc_req=xi_req)


def draw_conv_params(rng: np.random.Generator, kind: str, modality: str) -> ConvQoeParams:
    if kind == CONV_SINGLE:
        growth = max(float(rng.normal(30.0, 2.0)), 1e-3)
        req = float(rng.uniform(0.4e6, 0.6e6))
    elif modality == TEXT:
        growth = max(float(rng.normal(15.0, 1.0)), 1e-3)
        req = float(rng.uniform(0.8e6, 1.2e6))
    else:
        growth = max(float(rng.normal(2.0, 0.1)), 1e-3)
        req = float(rng.uniform(4.5e6, 6.5e6))
    return ConvQoeParams(rate_growth=growth, rate_req_bit_s=req)


def draw_sr_req(rng: np.random.Generator, modality: str) -> float:
    if modality == TEXT:
        return float(rng.uniform(40e3, 63e3))
    return float(rng.uniform(64e3, 94e3))


def generate_scenario(config: ScenarioConfig, seed: int) -> Scenario:
    """Drop users and draw channels; every random consumer has its own substream."""
    rng_place = substream(seed, "placement")
    rng_shadow = substream(seed, "shadowing")
    rng_fade = substream(seed, "fading")
    rng_qoe = substream(seed, "qoe")

    bs = bs_layout(config.cells, config.cell_radius_m)

    # groups in a fixed creation order: pairs before singles, semantic before
    # conventional, so a seed reproduces the same population; cells take the
    # groups of each kind round-robin, keeping the per-cell mix even
    plan = ([(SEM_PAIR, (TEXT, IMAGE))] * config.n_sem_pair
            + [(CONV_PAIR, (TEXT, IMAGE))] * config.n_conv_pair
            + [(SEM_SINGLE, (TEXT,))] * config.n_sem_single
            + [(CONV_SINGLE, (TEXT,))] * config.n_conv_single)

    users = []
    groups = []
    for gid, (kind, modalities) in enumerate(plan):
        cell = gid % config.cells
        members = []
        for modality in modalities:
            r = math.sqrt(rng_place.uniform(config.min_bs_dist_m ** 2,
                                            config.cell_radius_m ** 2))
            ang = rng_place.uniform(0.0, 2.0 * math.pi)
            pos = (float(bs[cell, 0] + r * math.cos(ang)),
                   float(bs[cell, 1] + r * math.sin(ang)))
            uid = len(users)
            if kind in SEMANTIC_KINDS:
                params = draw_semantic_params(rng_qoe, modality)
                conv = None
                system = "semantic"
            else:
                params = None
                conv = draw_conv_params(rng_qoe, kind, modality)
                system = "conventional"
            users.append(User(uid=uid, cell=cell, modality=modality, system=system,
                              position_m=pos, qoe=params, conv_qoe=conv,
                              sr_req_suts_s=draw_sr_req(rng_qoe, modality)))
            members.append(uid)
        groups.append(UserGroup(gid=gid, cell=cell, kind=kind, members=tuple(members)))

    u_count = len(users)
    pathloss = np.empty((u_count, config.cells))
    for u in users:
        for b in range(config.cells):
            d = math.hypot(u.position_m[0] - bs[b, 0], u.position_m[1] - bs[b, 1])
            pathloss[u.uid, b] = pathloss_db_at(max(d, config.min_bs_dist_m))
    shadowing = rng_shadow.normal(0.0, 6.0, size=(u_count, config.cells))

    amp = np.sqrt(10.0 ** (-(pathloss + shadowing) / 10.0))
    shape = (u_count, config.cells, config.channels, config.rx_antennas)
    fading = (rng_fade.standard_normal(shape) + 1j * rng_fade.standard_normal(shape)) / math.sqrt(2.0)
    gains = amp[:, :, None, None] * fading

    return Scenario(config=config, seed=int(seed), bs_positions_m=bs,
                    users=tuple(users), groups=tuple(groups),
                    pathloss_db=pathloss, shadowing_db=shadowing, gains=gains)


class SinrWorkspace:
    """Precomputed per-scenario arrays feeding the SINR kernel.

    sig4[u, m] = ||h||^4 and nrm2[u, m] = ||h||^2 at u's serving BS;
    cross[u, v, m] = |h_u^H h_v|^2 with both channels taken at u's BS.
    """

    def __init__(self, scenario: Scenario):
        cfg = scenario.config
        u_count = len(scenario.users)
        cell_of = np.array([usr.cell for usr in scenario.users], dtype=np.int32)
        nrm2 = np.empty((u_count, cfg.channels))
        sig4 = np.empty((u_count, cfg.channels))
        cross = np.empty((u_count, u_count, cfg.channels))
        for u in range(u_count):
            hu = scenario.gains[u, cell_of[u], :, :]          # (M, N_r)
            n2 = np.sum(np.abs(hu) ** 2, axis=1)
            nrm2[u] = n2
            sig4[u] = n2 ** 2
            for v in range(u_count):
                hv = scenario.gains[v, cell_of[u], :, :]
                cross[u, v] = np.abs(np.sum(np.conj(hu) * hv, axis=1)) ** 2
        self.cell_of = cell_of
        self.nrm2 = nrm2
        self.sig4 = sig4
        self.cross = cross
        self.noise_w = scenario.noise_watts
        self.user_count = u_count
        self.channels = cfg.channels

    def sinr(self, chan: np.ndarray, pow_w: np.ndarray,
             ignore_interference: bool = False) -> np.ndarray:
        return _kernel.sinr_eval(chan, pow_w, self.cell_of, self.sig4, self.nrm2,
                                 self.cross, self.noise_w, ignore_interference)


def compute_sinr(scenario: Scenario, channels, powers_dbm,
                 ignore_interference: bool = False) -> np.ndarray:
    """SINR (linear) per user for a channel/power assignment.

    `channels` and `powers_dbm` map uid -> value; None (or absent) means the
    user does not transmit.  Same-cell channel reuse is rejected.
    """
    u_count = len(scenario.users)
    chan = np.full(u_count, -1, dtype=np.int32)
    pw = np.zeros(u_count)
    used = set()
    for uid in range(u_count):
        m = channels.get(uid) if hasattr(channels, "get") else channels[uid]
        if m is None:
            continue
        m = int(m)
        if not (0 <= m < scenario.config.channels):
            raise ConfigError(f"channel {m} out of range for user {uid}")
        p = powers_dbm.get(uid) if hasattr(powers_dbm, "get") else powers_dbm[uid]
        if p is None:
            raise ConfigError(f"user {uid} has a channel but no power")
        key = (scenario.users[uid].cell, m)
        if key in used:
            raise ConfigError(f"channel {m} reused within cell {key[0]}")
        used.add(key)
        chan[uid] = m
        pw[uid] = float(dbm_to_watts(p))
    ws = SinrWorkspace(scenario)
    return ws.sinr(chan, pw, ignore_interference)


def _qoe_to_json(p: QoeParams | None):
    return None if p is None else asdict(p)


def _conv_to_json(p: ConvQoeParams | None):
    return None if p is None else asdict(p)


def scenario_to_jsonable(s: Scenario) -> dict:
    return {
        "schema": "semqoe.scenario.v1",
        "seed": s.seed,
        "config": asdict(s.config) | {"power_levels_dbm": list(s.config.power_levels_dbm)},
        "bs_positions_m": s.bs_positions_m.tolist(),
        "users": [
            {
                "uid": u.uid, "cell": u.cell, "modality": u.modality, "system": u.system,
                "position_m": list(u.position_m),
                "qoe": _qoe_to_json(u.qoe), "conv_qoe": _conv_to_json(u.conv_qoe),
                "sr_req_suts_s": u.sr_req_suts_s,
            }
            for u in s.users
        ],
        "groups": [
            {"gid": g.gid, "cell": g.cell, "kind": g.kind, "members": list(g.members)}
            for g in s.groups
        ],
        "pathloss_db": s.pathloss_db.tolist(),
        "shadowing_db": s.shadowing_db.tolist(),
        "gains_re": s.gains.real.tolist(),
        "gains_im": s.gains.imag.tolist(),
    }


def scenario_from_jsonable(data: dict) -> Scenario:
    if data.get("schema") != "semqoe.scenario.v1":
        raise ConfigError(f"unknown scenario schema {data.get('schema')!r}")
    cfg_data = dict(data["config"])
    cfg_data["power_levels_dbm"] = tuple(cfg_data["power_levels_dbm"])
    config = ScenarioConfig(**cfg_data)
    users = []
    for u in data["users"]:
        qoe = QoeParams(**u["qoe"]) if u["qoe"] is not None else None
        conv = ConvQoeParams(**u["conv_qoe"]) if u["conv_qoe"] is not None else None
        users.append(User(uid=u["uid"], cell=u["cell"], modality=u["modality"],
                          system=u["system"], position_m=tuple(u["position_m"]),
                          qoe=qoe, conv_qoe=conv, sr_req_suts_s=u["sr_req_suts_s"]))
    groups = [UserGroup(gid=g["gid"], cell=g["cell"], kind=g["kind"],
                        members=tuple(g["members"])) for g in data["groups"]]
    gains = np.asarray(data["gains_re"], dtype=float) + 1j * np.asarray(data["gains_im"], dtype=float)
    return Scenario(config=config, seed=int(data["seed"]),
                    bs_positions_m=np.asarray(data["bs_positions_m"], dtype=float),
                    users=tuple(users), groups=tuple(groups),
                    pathloss_db=np.asarray(data["pathloss_db"], dtype=float),
                    shadowing_db=np.asarray(data["shadowing_db"], dtype=float),
                    gains=gains)


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_jsonable(s), fh)


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_jsonable(json.load(fh))
