"""Semantic fidelity tables, learned surrogates, entropy extraction and rates.

Fidelity xi(k, gamma) maps a compression choice (symbols per word, or per
image) and received SINR to task accuracy in [0, 1].  Tables carry measured
grids; an MLP surrogate may replace a table anywhere a model is accepted.
Semantic information is measured in semantic units ("suts").
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import mlp
from .rng import substream

SINGLE = "single"
BIMODAL = "bimodal"

TEXT_K_GRID = tuple(range(1, 21))
VQA_TEXT_K_GRID = (1, 2, 4, 6, 8, 10, 12)
IMAGE_SYMBOLS_PER_UNIT = 197
VQA_IMAGE_K_UNITS = (1, 2, 4, 6, 8, 12, 16)
VQA_IMAGE_K_GRID = tuple(u * IMAGE_SYMBOLS_PER_UNIT for u in VQA_IMAGE_K_UNITS)
SINR_GRID_DB = tuple(float(g) for g in range(-10, 21))

MU_TEXT_BITS_PER_WORD = 40.0
MU_IMAGE_BITS_PER_IMAGE = 55624.0


class KOutOfGridError(ValueError):
    """Compression choice not on the model's measured grid."""


class FitError(RuntimeError):
    def __init__(self, final_mse: float, target_mse: float):
        super().__init__(f"surrogate fit MSE {final_mse:.3e} above target {target_mse:.3e}")
        self.final_mse = final_mse
        self.target_mse = target_mse


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


@dataclass(frozen=True)
class SynthShape:
    """Closed-form fidelity family used to synthesise plausible tables.

    max_fidelity(k) = 1 - c * exp(-d * k / k_unit) is the high-SINR ceiling;
    a logistic factor in SINR with midpoint b0 - b1 * k / k_unit models the
    waterfall, shifting left as more symbols add redundancy.
    """

    c: float
    d: float
    a: float
    b0: float
    b1: float
    k_unit: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.c < 1.0):
            raise ValueError("c must lie in (0, 1)")
        if not (self.d > 0 and self.a > 0 and self.k_unit > 0):
            raise ValueError("d, a, k_unit must be positive")
        if self.b1 < 0:
            raise ValueError("b1 must be nonnegative")

    def max_fidelity(self, k: float) -> float:
        return 1.0 - self.c * math.exp(-self.d * k / self.k_unit)

    def midpoint_db(self, k: float) -> float:
        return self.b0 - self.b1 * k / self.k_unit

    def channel_factor(self, k: float, sinr_db: float) -> float:
        return _sigmoid(self.a * (sinr_db - self.midpoint_db(k)))


DEFAULT_TEXT_SHAPE = SynthShape(c=0.7, d=0.55, a=1.0, b0=5.0, b1=0.5)
DEFAULT_VQA_TEXT_SHAPE = SynthShape(c=0.5, d=0.5, a=1.0, b0=5.0, b1=0.5)
DEFAULT_VQA_IMAGE_SHAPE = SynthShape(c=0.5, d=0.35, a=1.0, b0=5.0, b1=0.5,
                                     k_unit=float(IMAGE_SYMBOLS_PER_UNIT))


@dataclass
class FidelityTable:
    """Dense fidelity grid; one k/SINR axis pair (single) or two (bimodal)."""

    kind: str
    k_grids: tuple            # tuple of ascending int tuples
    sinr_grids_db: tuple      # tuple of ascending float tuples
    values: np.ndarray        # single: (K, S); bimodal: (Kt, Ki, St, Si)

    def __post_init__(self):
        if self.kind not in (SINGLE, BIMODAL):
            raise ValueError(f"unknown table kind {self.kind!r}")
        naxes = 1 if self.kind == SINGLE else 2
        self.k_grids = tuple(tuple(int(k) for k in g) for g in self.k_grids)
        self.sinr_grids_db = tuple(tuple(float(s) for s in g) for g in self.sinr_grids_db)
        if len(self.k_grids) != naxes or len(self.sinr_grids_db) != naxes:
            raise ValueError(f"{self.kind} table needs {naxes} k and SINR axes")
        for g in self.k_grids + self.sinr_grids_db:
            if len(g) < 2 or any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError("grids must be strictly ascending with >= 2 points")
        self.values = np.asarray(self.values, dtype=float)
        shape = tuple(len(g) for g in self.k_grids) + tuple(len(g) for g in self.sinr_grids_db)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {shape}")
        if np.any(self.values < 0) or np.any(self.values > 1):
            raise ValueError("fidelity values must lie in [0, 1]")


def synth_single_table(shape: SynthShape = DEFAULT_TEXT_SHAPE,
                       k_grid=TEXT_K_GRID, sinr_grid_db=SINR_GRID_DB) -> FidelityTable:
    vals = np.empty((len(k_grid), len(sinr_grid_db)))
    for i, k in enumerate(k_grid):
        for j, g in enumerate(sinr_grid_db):
            vals[i, j] = shape.max_fidelity(k) * shape.channel_factor(k, g)
    return FidelityTable(SINGLE, (tuple(k_grid),), (tuple(sinr_grid_db),), vals)


def synth_bimodal_table(text_shape: SynthShape = DEFAULT_VQA_TEXT_SHAPE,
                        image_shape: SynthShape = DEFAULT_VQA_IMAGE_SHAPE,
                        text_k_grid=VQA_TEXT_K_GRID, image_k_grid=VQA_IMAGE_K_GRID,
                        text_sinr_db=SINR_GRID_DB, image_sinr_db=SINR_GRID_DB) -> FidelityTable:
    """Joint task fidelity: ceilings multiply, the weaker link's waterfall binds."""
    vals = np.empty((len(text_k_grid), len(image_k_grid), len(text_sinr_db), len(image_sinr_db)))
    for it, kt in enumerate(text_k_grid):
        top_t = text_shape.max_fidelity(kt)
        for ii, ki in enumerate(image_k_grid):
            top = top_t * image_shape.max_fidelity(ki)
            for jt, gt in enumerate(text_sinr_db):
                lt = text_shape.channel_factor(kt, gt)
                for ji, gi in enumerate(image_sinr_db):
                    li = image_shape.channel_factor(ki, gi)
                    vals[it, ii, jt, ji] = top * min(lt, li)
    return FidelityTable(BIMODAL, (tuple(text_k_grid), tuple(image_k_grid)),
                         (tuple(text_sinr_db), tuple(image_sinr_db)), vals)


def save_table_csv(table: FidelityTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if table.kind == SINGLE:
            writer.writerow(["k_t", "gamma_t_db", "fidelity"])
            for i, k in enumerate(table.k_grids[0]):
                for j, g in enumerate(table.sinr_grids_db[0]):
                    writer.writerow([k, g, repr(float(table.values[i, j]))])
        else:
            writer.writerow(["k_t", "k_i", "gamma_t_db", "gamma_i_db", "fidelity"])
            for it, kt in enumerate(table.k_grids[0]):
                for ii, ki in enumerate(table.k_grids[1]):
                    for jt, gt in enumerate(table.sinr_grids_db[0]):
                        for ji, gi in enumerate(table.sinr_grids_db[1]):
                            writer.writerow([kt, ki, gt, gi,
                                             repr(float(table.values[it, ii, jt, ji]))])


def load_table_csv(path) -> FidelityTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header == ["k_t", "gamma_t_db", "fidelity"]:
            kind = SINGLE
        elif header == ["k_t", "k_i", "gamma_t_db", "gamma_i_db", "fidelity"]:
            kind = BIMODAL
        else:
            raise ValueError(f"unrecognised fidelity CSV header {header}")
        rows = [row for row in reader if row]
    if kind == SINGLE:
        ks = sorted({int(r[0]) for r in rows})
        gs = sorted({float(r[1]) for r in rows})
        vals = np.full((len(ks), len(gs)), np.nan)
        ki = {k: i for i, k in enumerate(ks)}
        gi = {g: i for i, g in enumerate(gs)}
        for r in rows:
            vals[ki[int(r[0])], gi[float(r[1])]] = float(r[2])
        if np.any(np.isnan(vals)):
            raise ValueError("fidelity CSV does not cover the full grid")
        return FidelityTable(SINGLE, (tuple(ks),), (tuple(gs),), vals)
    kts = sorted({int(r[0]) for r in rows})
    kis = sorted({int(r[1]) for r in rows})
    gts = sorted({float(r[2]) for r in rows})
    gis = sorted({float(r[3]) for r in rows})
    vals = np.full((len(kts), len(kis), len(gts), len(gis)), np.nan)
    kt_i = {k: i for i, k in enumerate(kts)}
    ki_i = {k: i for i, k in enumerate(kis)}
    gt_i = {g: i for i, g in enumerate(gts)}
    gi_i = {g: i for i, g in enumerate(gis)}
    for r in rows:
        vals[kt_i[int(r[0])], ki_i[int(r[1])], gt_i[float(r[2])], gi_i[float(r[3])]] = float(r[4])
    if np.any(np.isnan(vals)):
        raise ValueError("fidelity CSV does not cover the full grid")
    return FidelityTable(BIMODAL, (tuple(kts), tuple(kis)), (tuple(gts), tuple(gis)), vals)


class FidelityModel:
    """Common interface over measured tables and fitted surrogates."""

    kind: str
    k_grids: tuple
    sinr_grids_db: tuple

    def _k_index(self, axis: int, k: int) -> int:
        try:
            return self._k_index_maps[axis][int(k)]
        except KeyError:
            raise KOutOfGridError(
                f"k={k} not on axis-{axis} grid {self.k_grids[axis]}") from None

    def evaluate(self, k, sinr_db) -> float:
        raise NotImplementedError

    def sinr_profile(self, k) -> np.ndarray:
        """Fidelity of one compression choice sampled over the SINR grid(s)."""
        raise NotImplementedError


def _as_tuple(x, n):
    t = (x,) if np.isscalar(x) else tuple(x)
    if len(t) != n:
        raise ValueError(f"expected {n} component(s), got {t}")
    return t


def _interp1(grid: np.ndarray, row: np.ndarray, x: float) -> float:
    # clamp to table bounds, linear between nodes
    if x <= grid[0]:
        return float(row[0])
    if x >= grid[-1]:
        return float(row[-1])
    j = int(np.searchsorted(grid, x, side="right")) - 1
    frac = (x - grid[j]) / (grid[j + 1] - grid[j])
    return float(row[j] + (row[j + 1] - row[j]) * frac)


class TableFidelityModel(FidelityModel):
    def __init__(self, table: FidelityTable):
        self.table = table
        self.kind = table.kind
        self.k_grids = table.k_grids
        self.sinr_grids_db = table.sinr_grids_db
        self._k_index_maps = [{k: i for i, k in enumerate(g)} for g in table.k_grids]
        self._sgrids = [np.asarray(g) for g in table.sinr_grids_db]

    def evaluate(self, k, sinr_db) -> float:
        naxes = 1 if self.kind == SINGLE else 2
        ks = _as_tuple(k, naxes)
        gs = _as_tuple(sinr_db, naxes)
        if self.kind == SINGLE:
            row = self.table.values[self._k_index(0, ks[0])]
            return _interp1(self._sgrids[0], row, float(gs[0]))
        plane = self.table.values[self._k_index(0, ks[0]), self._k_index(1, ks[1])]
        gt, gi = float(gs[0]), float(gs[1])
        # bilinear: interpolate along image SINR then text SINR
        cols = np.array([_interp1(self._sgrids[1], plane[jt], gi)
                         for jt in range(plane.shape[0])])
        return _interp1(self._sgrids[0], cols, gt)

    def sinr_profile(self, k) -> np.ndarray:
        naxes = 1 if self.kind == SINGLE else 2
        ks = _as_tuple(k, naxes)
        if self.kind == SINGLE:
            return self.table.values[self._k_index(0, ks[0])].copy()
        return self.table.values[self._k_index(0, ks[0]), self._k_index(1, ks[1])].copy()


class MlpFidelityModel(FidelityModel):
    """MLP surrogate over the same grids; SINR features are clamped to the grid box."""

    def __init__(self, params: mlp.MlpParams, kind: str, k_grids, sinr_grids_db):
        self.params = params
        self.kind = kind
        self.k_grids = tuple(tuple(int(k) for k in g) for g in k_grids)
        self.sinr_grids_db = tuple(tuple(float(s) for s in g) for g in sinr_grids_db)
        self._k_index_maps = [{k: i for i, k in enumerate(g)} for g in self.k_grids]

    def _features(self, ks, gs) -> np.ndarray:
        feats = []
        for axis, k in enumerate(ks):
            feats.append(k / self.k_grids[axis][-1])
        for axis, g in enumerate(gs):
            lo, hi = self.sinr_grids_db[axis][0], self.sinr_grids_db[axis][-1]
            feats.append((min(max(g, lo), hi) - lo) / (hi - lo))
        return np.array(feats)

    def evaluate(self, k, sinr_db) -> float:
        naxes = 1 if self.kind == SINGLE else 2
        ks = _as_tuple(k, naxes)
        gs = _as_tuple(sinr_db, naxes)
        for axis, kk in enumerate(ks):
            self._k_index(axis, kk)
        y = float(mlp.forward(self.params, self._features(ks, gs))[0])
        return min(max(y, 0.0), 1.0)

    def sinr_profile(self, k) -> np.ndarray:
        naxes = 1 if self.kind == SINGLE else 2
        ks = _as_tuple(k, naxes)
        for axis, kk in enumerate(ks):
            self._k_index(axis, kk)
        if self.kind == SINGLE:
            grid = self.sinr_grids_db[0]
            feats = np.array([self._features(ks, (g,)) for g in grid])
            out = mlp.forward(self.params, feats)[:, 0]
            return np.clip(out, 0.0, 1.0)
        gt, gi = self.sinr_grids_db
        feats = np.array([self._features(ks, (a, b)) for a in gt for b in gi])
        out = mlp.forward(self.params, feats)[:, 0]
        return np.clip(out, 0.0, 1.0).reshape(len(gt), len(gi))


def _table_dataset(table: FidelityTable):
    if table.kind == SINGLE:
        kg = np.asarray(table.k_grids[0], dtype=float)
        sg = np.asarray(table.sinr_grids_db[0], dtype=float)
        kk, gg = np.meshgrid(kg / kg[-1], (sg - sg[0]) / (sg[-1] - sg[0]), indexing="ij")
        x = np.column_stack([kk.ravel(), gg.ravel()])
    else:
        kt = np.asarray(table.k_grids[0], dtype=float)
        ki = np.asarray(table.k_grids[1], dtype=float)
        st = np.asarray(table.sinr_grids_db[0], dtype=float)
        si = np.asarray(table.sinr_grids_db[1], dtype=float)
        a, b, c, d = np.meshgrid(kt / kt[-1], ki / ki[-1],
                                 (st - st[0]) / (st[-1] - st[0]),
                                 (si - si[0]) / (si[-1] - si[0]), indexing="ij")
        x = np.column_stack([a.ravel(), b.ravel(), c.ravel(), d.ravel()])
    return x, table.values.ravel()[:, None]


def fit_fidelity(table: FidelityTable, spec: mlp.MlpSpec | None = None, *,
                 epochs: int | None = None, batch_size: int = 64, seed: int = 0,
                 target_mse: float = 1e-3, stop_mse: float | None = None) -> MlpFidelityModel:
    """Fit an MLP surrogate to a table; raises FitError if target MSE is missed."""
    if spec is None:
        sizes = (2, 16, 1) if table.kind == SINGLE else (4, 32, 32, 1)
        spec = mlp.MlpSpec(sizes, hidden_activation="sigmoid",
                           output_activation="sigmoid", learning_rate=1e-3)
    if epochs is None:
        epochs = 4000 if table.kind == SINGLE else 400
    if stop_mse is None:
        stop_mse = target_mse / 2.0
    x, y = _table_dataset(table)
    rng = substream(seed, "fidelity_fit")
    params = mlp.init_params(spec, rng)
    n = x.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            mlp.train_step(params, x[idx], y[idx])
        resid = mlp.forward(params, x) - y
        full = float(np.mean(resid ** 2))
        if full <= stop_mse:
            break
    resid = mlp.forward(params, x) - y
    final = float(np.mean(resid ** 2))
    if final > target_mse:
        raise FitError(final, target_mse)
    return MlpFidelityModel(params, table.kind, table.k_grids, table.sinr_grids_db)


def save_mlp_model(model: MlpFidelityModel, path) -> None:
    data = {
        "schema": "semqoe.fidelity-mlp.v1",
        "kind": model.kind,
        "k_grids": [list(g) for g in model.k_grids],
        "sinr_grids_db": [list(g) for g in model.sinr_grids_db],
        "params": mlp.to_jsonable(model.params),
    }
    with open(path, "w") as fh:
        json.dump(data, fh)
        fh.write("\n")


def load_mlp_model(path) -> MlpFidelityModel:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("schema") != "semqoe.fidelity-mlp.v1":
        raise ValueError(f"unknown fidelity model schema {data.get('schema')!r}")
    return MlpFidelityModel(mlp.from_jsonable(data["params"]), data["kind"],
                            [tuple(g) for g in data["k_grids"]],
                            [tuple(g) for g in data["sinr_grids_db"]])


@dataclass(frozen=True)
class SemanticEntropy:
    """Approximate semantic entropies in suts; fields are None when not applicable."""

    h_si: float | None = None      # single text, suts/word
    h_bi_t: float | None = None    # bimodal text branch, suts/word
    h_bi_i: float | None = None    # bimodal image branch, suts/image
    epsilon: float = 0.05


def approx_semantic_entropy(table: FidelityTable, epsilon: float = 0.05) -> SemanticEntropy:
    """Smallest compression meeting peak fidelity minus epsilon at max SINR.

    Bimodal tables use a lexicographic scan (text symbols first, then image);
    the chosen symbol counts are the entropy estimates in suts.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if table.kind == SINGLE:
        vals = table.values[:, -1]
        thr = float(vals.max()) - epsilon
        for i, k in enumerate(table.k_grids[0]):
            if vals[i] >= thr:
                return SemanticEntropy(h_si=float(k), epsilon=epsilon)
        raise RuntimeError("unreachable: maximum always meets its own threshold")
    vals = table.values[:, :, -1, -1]
    thr = float(vals.max()) - epsilon
    for it, kt in enumerate(table.k_grids[0]):
        for ii, ki in enumerate(table.k_grids[1]):
            if vals[it, ii] >= thr:
                return SemanticEntropy(h_bi_t=float(kt), h_bi_i=float(ki), epsilon=epsilon)
    raise RuntimeError("unreachable: maximum always meets its own threshold")


def merge_entropy(single: SemanticEntropy, bimodal: SemanticEntropy) -> SemanticEntropy:
    if single.epsilon != bimodal.epsilon:
        raise ValueError("entropy records use different epsilon")
    return SemanticEntropy(h_si=single.h_si, h_bi_t=bimodal.h_bi_t,
                           h_bi_i=bimodal.h_bi_i, epsilon=single.epsilon)


def semantic_rate(entropy_suts: float, k_symbols: float, bandwidth_hz: float) -> float:
    """phi = H * W / k in suts/s."""
    if k_symbols <= 0 or bandwidth_hz <= 0 or entropy_suts <= 0:
        raise ValueError("entropy, k and bandwidth must be positive")
    return entropy_suts * bandwidth_hz / k_symbols

def s_rate(phi_suts_s: float, xi: float) -> float:
    """Fidelity-weighted semantic rate Gamma = phi * xi."""
    if phi_suts_s < 0:
        raise ValueError("semantic rate must be nonnegative")
    if not (0.0 <= xi <= 1.0):
        raise ValueError("fidelity must lie in [0, 1]")
    return phi_suts_s * xi


def conventional_bit_rate(sinr_linear: float, bandwidth_hz: float) -> float:
    """Shannon rate W * log2(1 + gamma) in bit/s."""
    if sinr_linear < 0:
        raise ValueError("SINR must be nonnegative")
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return bandwidth_hz * math.log2(1.0 + sinr_linear)


def equivalent_s_rate(bit_rate_bit_s: float, mu_bits: float, entropy_suts: float) -> float:
    """S-rate a bit pipe would carry: (C / mu) * H, suts/s."""
    if bit_rate_bit_s < 0:
        raise ValueError("bit rate must be nonnegative")
    if mu_bits <= 0 or entropy_suts <= 0:
        raise ValueError("mu and entropy must be positive")
    return bit_rate_bit_s / mu_bits * entropy_suts


def entropy_report(record: SemanticEntropy) -> dict:
    return {
        "schema": "semqoe.entropy.v1",
        "epsilon": record.epsilon,
        "h_si_suts_per_word": record.h_si,
        "h_bi_t_suts_per_word": record.h_bi_t,
        "h_bi_i_suts_per_image": record.h_bi_i,
    }
