import numpy as np
import pytest

from semqoe import mlp, semantics as sem


def small_bimodal_table():
    return sem.synth_bimodal_table(
        text_k_grid=(1, 2, 4), image_k_grid=(197, 394),
        text_sinr_db=(-10.0, 0.0, 10.0, 20.0), image_sinr_db=(-10.0, 0.0, 10.0, 20.0))


# ---------------------------------------------------------------- synthesis

def test_single_table_monotone_in_k_and_sinr():
    t = sem.synth_single_table()
    assert np.all(np.diff(t.values, axis=0) > 0)   # more symbols never hurt
    assert np.all(np.diff(t.values, axis=1) > 0)   # better channel never hurts


def test_bimodal_table_monotone_each_axis():
    t = small_bimodal_table()
    for axis in range(4):
        assert np.all(np.diff(t.values, axis=axis) >= 0)


def test_channel_factor_saturates_at_high_sinr():
    for shape in (sem.DEFAULT_TEXT_SHAPE, sem.DEFAULT_VQA_TEXT_SHAPE,
                  sem.DEFAULT_VQA_IMAGE_SHAPE):
        for k in (1, 5, 20 * shape.k_unit):
            assert shape.channel_factor(k, 60.0) > 1.0 - 1e-6
    assert sem.DEFAULT_TEXT_SHAPE.max_fidelity(1e9) == pytest.approx(1.0)


def test_synth_shape_validation():
    with pytest.raises(ValueError):
        sem.SynthShape(c=1.5, d=1, a=1, b0=0, b1=0)
    with pytest.raises(ValueError):
        sem.SynthShape(c=0.5, d=-1, a=1, b0=0, b1=0)
    with pytest.raises(ValueError):
        sem.SynthShape(c=0.5, d=1, a=1, b0=0, b1=-2)


def test_table_validation():
    with pytest.raises(ValueError):
        sem.FidelityTable(sem.SINGLE, ((2, 1),), ((0.0, 1.0),), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        sem.FidelityTable(sem.SINGLE, ((1, 2),), ((0.0, 1.0),), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        sem.FidelityTable(sem.SINGLE, ((1, 2),), ((0.0, 1.0),), np.full((2, 2), 1.5))
    with pytest.raises(ValueError):
        sem.FidelityTable("triple", ((1, 2),), ((0.0, 1.0),), np.zeros((2, 2)))


# ---------------------------------------------------------------- CSV round trip

def test_csv_round_trip_exact(tmp_path):
    for table in (sem.synth_single_table(k_grid=(1, 3, 7), sinr_grid_db=(-5.0, 2.5, 11.0)),
                  small_bimodal_table()):
        path = tmp_path / f"{table.kind}.csv"
        sem.save_table_csv(table, path)
        back = sem.load_table_csv(path)
        assert back.kind == table.kind
        assert back.k_grids == table.k_grids
        assert back.sinr_grids_db == table.sinr_grids_db
        assert np.array_equal(back.values, table.values)


def test_csv_bad_header_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("alpha,beta\n1,2\n")
    with pytest.raises(ValueError):
        sem.load_table_csv(path)


# ---------------------------------------------------------------- interpolation

def test_table_model_node_identity_single():
    table = sem.synth_single_table()
    model = sem.TableFidelityModel(table)
    for i, k in enumerate(table.k_grids[0]):
        for j, g in enumerate(table.sinr_grids_db[0]):
            assert model.evaluate(k, g) == table.values[i, j]


def test_table_model_matches_np_interp_single():
    table = sem.synth_single_table()
    model = sem.TableFidelityModel(table)
    grid = np.asarray(table.sinr_grids_db[0])
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = int(rng.choice(table.k_grids[0]))
        g = float(rng.uniform(-15, 25))    # includes out-of-grid, clamped
        ref = float(np.interp(g, grid, table.values[table.k_grids[0].index(k)]))
        assert model.evaluate(k, g) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_table_model_midpoint_is_mean():
    table = sem.synth_single_table()
    model = sem.TableFidelityModel(table)
    v0 = table.values[4, 10]
    v1 = table.values[4, 11]
    g_mid = 0.5 * (table.sinr_grids_db[0][10] + table.sinr_grids_db[0][11])
    assert model.evaluate(table.k_grids[0][4], g_mid) == pytest.approx(0.5 * (v0 + v1), rel=1e-12)


def test_table_model_bilinear_matches_np_interp():
    table = small_bimodal_table()
    model = sem.TableFidelityModel(table)
    gt_grid = np.asarray(table.sinr_grids_db[0])
    gi_grid = np.asarray(table.sinr_grids_db[1])
    rng = np.random.default_rng(1)
    for _ in range(100):
        kt = int(rng.choice(table.k_grids[0]))
        ki = int(rng.choice(table.k_grids[1]))
        gt = float(rng.uniform(-15, 25))
        gi = float(rng.uniform(-15, 25))
        plane = table.values[table.k_grids[0].index(kt), table.k_grids[1].index(ki)]
        cols = np.array([np.interp(gi, gi_grid, row) for row in plane])
        ref = float(np.interp(gt, gt_grid, cols))
        assert model.evaluate((kt, ki), (gt, gi)) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_table_model_outputs_in_unit_interval():
    model = sem.TableFidelityModel(sem.synth_single_table())
    rng = np.random.default_rng(2)
    for _ in range(500):
        v = model.evaluate(int(rng.integers(1, 21)), float(rng.uniform(-30, 40)))
        assert 0.0 <= v <= 1.0


def test_k_off_grid_raises():
    single = sem.TableFidelityModel(sem.synth_single_table())
    with pytest.raises(sem.KOutOfGridError):
        single.evaluate(21, 0.0)
    bimodal = sem.TableFidelityModel(small_bimodal_table())
    with pytest.raises(sem.KOutOfGridError):
        bimodal.evaluate((3, 197), (0.0, 0.0))
    with pytest.raises(sem.KOutOfGridError):
        bimodal.evaluate((1, 198), (0.0, 0.0))


def test_sinr_profile_is_a_copy():
    table = sem.synth_single_table()
    model = sem.TableFidelityModel(table)
    prof = model.sinr_profile(3)
    assert np.array_equal(prof, table.values[2])
    prof[:] = -1.0
    assert np.all(table.values >= 0)


# ---------------------------------------------------------------- surrogate fit

def test_fit_constant_table_converges_fast():
    table = sem.FidelityTable(sem.SINGLE, ((1, 2, 3),), ((0.0, 5.0, 10.0),),
                              np.full((3, 3), 0.5))
    model = sem.fit_fidelity(table, epochs=800, seed=1, target_mse=1e-4)
    for k in (1, 2, 3):
        assert model.evaluate(k, 5.0) == pytest.approx(0.5, abs=0.05)


def test_fit_deterministic_for_seed():
    table = sem.synth_single_table(k_grid=(1, 2, 4), sinr_grid_db=(-10.0, 0.0, 10.0, 20.0))
    a = sem.fit_fidelity(table, epochs=30, seed=3, target_mse=1.0)
    b = sem.fit_fidelity(table, epochs=30, seed=3, target_mse=1.0)
    for wa, wb in zip(a.params.weights, b.params.weights):
        assert np.array_equal(wa, wb)


def test_fit_error_reports_mse():
    rng = np.random.default_rng(4)
    table = sem.FidelityTable(sem.SINGLE, ((1, 2, 3, 4),), ((0.0, 1.0, 2.0, 3.0),),
                              rng.uniform(0, 1, size=(4, 4)))
    with pytest.raises(sem.FitError) as exc:
        sem.fit_fidelity(table, epochs=1, target_mse=1e-9)
    assert exc.value.final_mse > exc.value.target_mse


def test_mlp_model_clips_and_guards_grid():
    spec = mlp.MlpSpec((2, 4, 1), hidden_activation="sigmoid",
                       output_activation="identity")
    params = mlp.init_params(spec, np.random.default_rng(5))
    params.biases[-1][0] = 50.0    # force raw output far above 1
    model = sem.MlpFidelityModel(params, sem.SINGLE, ((1, 2),), ((0.0, 10.0),))
    assert model.evaluate(1, 5.0) == 1.0
    with pytest.raises(sem.KOutOfGridError):
        model.evaluate(3, 5.0)


def test_mlp_model_json_round_trip(tmp_path):
    table = sem.synth_single_table(k_grid=(1, 2, 4), sinr_grid_db=(-10.0, 0.0, 20.0))
    model = sem.fit_fidelity(table, epochs=20, seed=6, target_mse=1.0)
    path = tmp_path / "model.json"
    sem.save_mlp_model(model, path)
    back = sem.load_mlp_model(path)
    assert back.kind == model.kind
    assert back.k_grids == model.k_grids
    rng = np.random.default_rng(7)
    for _ in range(20):
        k = int(rng.choice(model.k_grids[0]))
        g = float(rng.uniform(-10, 20))
        assert back.evaluate(k, g) == model.evaluate(k, g)


# ---------------------------------------------------------------- entropy

def entropy_oracle_single(table, eps):
    col = table.values[:, -1]
    thr = col.max() - eps
    return float(min(k for k, v in zip(table.k_grids[0], col) if v >= thr))


def entropy_oracle_bimodal(table, eps):
    corner = table.values[:, :, -1, -1]
    thr = corner.max() - eps
    best = None
    for it, kt in enumerate(table.k_grids[0]):
        for ii, ki in enumerate(table.k_grids[1]):
            if corner[it, ii] >= thr and (best is None or (kt, ki) < best):
                best = (kt, ki)
    return best


def test_entropy_matches_brute_scan_on_random_tables():
    rng = np.random.default_rng(8)
    for trial in range(20):
        ks = tuple(sorted(rng.choice(np.arange(1, 30), size=5, replace=False).tolist()))
        gs = tuple(np.linspace(-10, 20, 4))
        vals = rng.uniform(0, 1, size=(5, 4))
        table = sem.FidelityTable(sem.SINGLE, (ks,), (gs,), vals)
        eps = float(rng.uniform(0.01, 0.5))
        rec = sem.approx_semantic_entropy(table, eps)
        assert rec.h_si == entropy_oracle_single(table, eps)
        # minimality: every smaller grid point misses the threshold
        thr = vals[:, -1].max() - eps
        for k, v in zip(ks, vals[:, -1]):
            if k < rec.h_si:
                assert v < thr


def test_entropy_bimodal_matches_lexicographic_oracle():
    rng = np.random.default_rng(9)
    for trial in range(20):
        kts = (1, 2, 4, 6)
        kis = (197, 394, 788)
        gs = (0.0, 10.0, 20.0)
        vals = rng.uniform(0, 1, size=(4, 3, 3, 3))
        table = sem.FidelityTable(sem.BIMODAL, (kts, kis), (gs, gs), vals)
        eps = float(rng.uniform(0.01, 0.5))
        rec = sem.approx_semantic_entropy(table, eps)
        assert (rec.h_bi_t, rec.h_bi_i) == entropy_oracle_bimodal(table, eps)


def test_entropy_epsilon_extremes():
    table = sem.synth_single_table()
    wide = sem.approx_semantic_entropy(table, 0.99)
    assert wide.h_si == float(table.k_grids[0][0])     # everything qualifies
    tight = sem.approx_semantic_entropy(table, 1e-9)
    peak = table.values[:, -1]
    assert tight.h_si == float(table.k_grids[0][int(np.argmax(peak))])
    with pytest.raises(ValueError):
        sem.approx_semantic_entropy(table, 0.0)
    with pytest.raises(ValueError):
        sem.approx_semantic_entropy(table, 1.0)


def test_merge_entropy():
    single = sem.SemanticEntropy(h_si=5.0, epsilon=0.05)
    bimodal = sem.SemanticEntropy(h_bi_t=6.0, h_bi_i=2364.0, epsilon=0.05)
    merged = sem.merge_entropy(single, bimodal)
    assert (merged.h_si, merged.h_bi_t, merged.h_bi_i) == (5.0, 6.0, 2364.0)
    with pytest.raises(ValueError):
        sem.merge_entropy(single, sem.SemanticEntropy(h_bi_t=6.0, epsilon=0.1))


def test_entropy_report_keys():
    rep = sem.entropy_report(sem.SemanticEntropy(h_si=5.0, epsilon=0.05))
    assert rep["h_si_suts_per_word"] == 5.0
    assert rep["epsilon"] == 0.05
    assert rep["schema"].endswith("entropy.v1")


# ---------------------------------------------------------------- rates

def test_rate_identities():
    w = 180e3
    assert sem.semantic_rate(5.0, 5.0, w) == w            # H = k collapses to W
    assert sem.semantic_rate(4.0, 8.0, w) == 90e3
    assert sem.s_rate(90e3, 0.5) == 45e3
    assert sem.conventional_bit_rate(1.0, w) == pytest.approx(w, rel=1e-12)
    assert sem.conventional_bit_rate(3.0, w) == pytest.approx(2 * w, rel=1e-12)
    assert sem.conventional_bit_rate(0.0, w) == 0.0
    assert sem.equivalent_s_rate(sem.MU_TEXT_BITS_PER_WORD, sem.MU_TEXT_BITS_PER_WORD, 5.0) == 5.0
    assert sem.equivalent_s_rate(2e6, 40.0, 5.0) == pytest.approx(2 * sem.equivalent_s_rate(1e6, 40.0, 5.0), rel=1e-12)


def test_rate_validation():
    with pytest.raises(ValueError):
        sem.semantic_rate(0.0, 5.0, 180e3)
    with pytest.raises(ValueError):
        sem.semantic_rate(5.0, 0.0, 180e3)
    with pytest.raises(ValueError):
        sem.s_rate(1.0, 1.5)
    with pytest.raises(ValueError):
        sem.s_rate(-1.0, 0.5)
    with pytest.raises(ValueError):
        sem.conventional_bit_rate(-0.1, 180e3)
    with pytest.raises(ValueError):
        sem.equivalent_s_rate(1.0, 0.0, 5.0)


def test_grid_constants():
    assert sem.TEXT_K_GRID == tuple(range(1, 21))
    assert sem.VQA_IMAGE_K_GRID[0] == 197
    assert len(sem.SINR_GRID_DB) == 31
    assert sem.VQA_IMAGE_K_GRID == tuple(197 * u for u in sem.VQA_IMAGE_K_UNITS)
