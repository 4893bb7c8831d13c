"""Pure-Python reference kernels; semantics mirror the compiled extension.

Scalar math (exp, lerp order) is written to match the C code operation for
operation so both backends agree to the last bit on the same inputs.
"""
from __future__ import annotations

import math

import numpy as np


def sinr_eval(chan, pow_w, cell_of, sig4, nrm2, cross, noise_w, ignore_interference=False):
    """Post-MRC SINR per user; chan < 0 or zero power means silent (gamma 0)."""
    n = chan.shape[0]
    gamma = np.zeros(n)
    for u in range(n):
        m = chan[u]
        if m < 0 or pow_w[u] <= 0.0:
            continue
        den = nrm2[u, m] * noise_w
        if not ignore_interference:
            for v in range(n):
                if v == u or chan[v] != m or pow_w[v] <= 0.0:
                    continue
                if cell_of[v] == cell_of[u]:
                    continue
                den += pow_w[v] * cross[u, v, m]
        gamma[u] = pow_w[u] * sig4[u, m] / den
    return gamma


def _logistic(value, requirement, growth):
    z = growth * (requirement - value)
    if z > 500.0:
        return 0.0
    if z < -500.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(z))


def _locate(grid, x):
    # clamped bracket + fraction on an ascending grid
    n = grid.shape[0]
    if x <= grid[0]:
        return 0, 0.0
    if x >= grid[n - 1]:
        return n - 2, 1.0
    j = n - 2
    for i in range(n - 1):
        if x < grid[i + 1]:
            j = i
            break
    return j, (x - grid[j]) / (grid[j + 1] - grid[j])


def p1_scan_single(g_db, w, beta, phi_req_k, lam, xi_req, g_th, phi_k, fid, sgrid):
    """Best compression for one single-modal user at SINR g_db.

    phi_k[a] is the semantic rate of action a in Ksuts/s, fid[a, s] its fidelity
    over the SINR grid.  Returns (action_index, reward, served) where reward is
    the QoE if any action meets the serving gate, else 0 with index 0.
    """
    j, frac = _locate(sgrid, g_db)
    best_i = 0
    best_r = 0.0
    best_served = False
    for a in range(phi_k.shape[0]):
        lo = fid[a, j]
        xi = lo + (fid[a, j + 1] - lo) * frac
        g_r = _logistic(phi_k[a], phi_req_k, beta)
        g_a = _logistic(xi, xi_req, lam)
        served = g_r >= g_th and g_a >= g_th
        r = w * g_r + (1.0 - w) * g_a if served else 0.0
        if r > best_r:
            best_r = r
            best_i = a
            best_served = served
    return best_i, best_r, best_served


def p1_scan_bimodal(gt_db, gi_db, w_t, beta_t, phi_req_t, lam_t, xi_req_t,
                    w_i, beta_i, phi_req_i, lam_i, xi_req_i, g_th,
                    phi_t, phi_i, fid, sgrid_t, sgrid_i):
    """Best joint (text, image) compression for a bimodal pair.

    fid[a, st, si] is the shared task fidelity of action a over both SINR
    grids; reward sums the two members' QoE and serving requires all four
    component scores to clear the gate.
    """
    jt, ft = _locate(sgrid_t, gt_db)
    ji, fi = _locate(sgrid_i, gi_db)
    best_i = 0
    best_r = 0.0
    best_served = False
    for a in range(phi_t.shape[0]):
        v_lo = fid[a, jt, ji] + (fid[a, jt, ji + 1] - fid[a, jt, ji]) * fi
        v_hi = fid[a, jt + 1, ji] + (fid[a, jt + 1, ji + 1] - fid[a, jt + 1, ji]) * fi
        xi = v_lo + (v_hi - v_lo) * ft
        g_rt = _logistic(phi_t[a], phi_req_t, beta_t)
        g_at = _logistic(xi, xi_req_t, lam_t)
        g_ri = _logistic(phi_i[a], phi_req_i, beta_i)
        g_ai = _logistic(xi, xi_req_i, lam_i)
        served = (g_rt >= g_th and g_at >= g_th and g_ri >= g_th and g_ai >= g_th)
        if served:
            r = w_t * g_rt + (1.0 - w_t) * g_at + w_i * g_ri + (1.0 - w_i) * g_ai
        else:
            r = 0.0
        if r > best_r:
            best_r = r
            best_i = a
            best_served = served
    return best_i, best_r, best_served
