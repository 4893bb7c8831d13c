"""Timing comparison of the numpy reference kernels against the compiled ones.

Runs the three hot paths (uplink SINR evaluation and the two per-group
compression scans) on realistic inputs and reports per-call times plus the
speedup.  Usage:

    python benchmarks/bench_kernel.py [--repeats 200]
"""
import argparse
import time

import numpy as np

from semqoe._kernel import available_backends, get_backend
from semqoe.baselines import random_matching
from semqoe.harness import default_bundle
from semqoe.netmodel import ScenarioConfig, SinrWorkspace, generate_scenario
from semqoe.qoe import QoeParams
from semqoe.semantics import semantic_rate


def sinr_case():
    scenario = generate_scenario(ScenarioConfig(), seed=0)
    ws = SinrWorkspace(scenario)
    chan, pow_w = random_matching(scenario, seed=1).to_user_arrays(scenario)
    args = (chan, pow_w, ws.cell_of, ws.sig4, ws.nrm2, ws.cross, ws.noise_w, False)
    return "sinr_eval (18 users, 3 cells)", args


def single_scan_case():
    bundle = default_bundle()
    table = bundle.table_single
    ks = np.asarray(table.k_grids[0], dtype=float)
    phi_k = np.array([semantic_rate(bundle.entropy.h_si, int(k), 180e3) / 1e3
                      for k in ks])
    fid = np.ascontiguousarray(table.values)
    sgrid = np.asarray(table.sinr_grids_db[0])
    args = (7.3, 0.55, 0.9, 42.0, 18.0, 0.82, 0.5, phi_k, fid, sgrid)
    return "p1_scan_single (20 actions)", args


def bimodal_scan_case():
    bundle = default_bundle()
    table = bundle.table_bimodal
    actions = [(kt, ki) for kt in table.k_grids[0] for ki in table.k_grids[1]]
    phi_t = np.array([semantic_rate(bundle.entropy.h_bi_t, kt, 180e3) / 1e3
                      for kt, _ in actions])
    phi_i = np.array([semantic_rate(bundle.entropy.h_bi_i, ki, 180e3) / 1e3
                      for _, ki in actions])
    model_vals = np.ascontiguousarray(
        np.stack([table.values[i // 7, i % 7] for i in range(len(actions))]))
    gt_grid = np.asarray(table.sinr_grids_db[0])
    gi_grid = np.asarray(table.sinr_grids_db[1])
    args = (6.1, -2.4, 0.55, 0.9, 40.0, 18.0, 0.82,
            0.45, 0.8, 3200.0, 15.0, 0.75, 0.5,
            phi_t, phi_i, model_vals, gt_grid, gi_grid)
    return "p1_scan_bimodal (49 actions)", args


def time_call(fn, args, repeats):
    fn(*args)                      # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not built; showing python times only")

    cases = [
        ("sinr_eval", sinr_case()),
        ("p1_scan_single", single_scan_case()),
        ("p1_scan_bimodal", bimodal_scan_case()),
    ]
    header = f"{'kernel':34s} {'python':>12s} {'compiled':>12s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for fn_name, (label, call_args) in cases:
        py = time_call(getattr(get_backend("python"), fn_name), call_args, args.repeats)
        line = f"{label:34s} {py * 1e6:10.1f}us"
        if "compiled" in backends:
            cy = time_call(getattr(get_backend("compiled"), fn_name), call_args,
                           args.repeats)
            line += f" {cy * 1e6:10.1f}us {py / cy:8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
