# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: per-candidate SINR evaluation and compression scans."""

from libc.math cimport exp

import numpy as np


cdef inline double _logistic(double value, double requirement, double growth) nogil:
    cdef double z = growth * (requirement - value)
    if z > 500.0:
        return 0.0
    if z < -500.0:
        return 1.0
    return 1.0 / (1.0 + exp(z))


cdef inline void _locate(const double[::1] grid, double x, Py_ssize_t* j, double* frac) nogil:
    cdef Py_ssize_t n = grid.shape[0]
    cdef Py_ssize_t i
    if x <= grid[0]:
        j[0] = 0
        frac[0] = 0.0
        return
    if x >= grid[n - 1]:
        j[0] = n - 2
        frac[0] = 1.0
        return
    j[0] = n - 2
    for i in range(n - 1):
        if x < grid[i + 1]:
            j[0] = i
            break
    frac[0] = (x - grid[j[0]]) / (grid[j[0] + 1] - grid[j[0]])


def sinr_eval(const int[::1] chan, const double[::1] pow_w, const int[::1] cell_of,
              const double[:, ::1] sig4, const double[:, ::1] nrm2,
              const double[:, :, ::1] cross, double noise_w, bint ignore_interference=False):
    """Post-MRC SINR per user; chan < 0 or zero power means silent (gamma 0)."""
    cdef Py_ssize_t n = chan.shape[0]
    cdef Py_ssize_t u, v
    cdef int m
    cdef double den
    out = np.zeros(n)
    cdef double[::1] gamma = out
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
    return out


def p1_scan_single(double g_db, double w, double beta, double phi_req_k,
                   double lam, double xi_req, double g_th,
                   const double[::1] phi_k, const double[:, ::1] fid,
                   const double[::1] sgrid):
    """Best compression for one single-modal user at SINR g_db."""
    cdef Py_ssize_t j = 0
    cdef double frac = 0.0
    _locate(sgrid, g_db, &j, &frac)
    cdef Py_ssize_t best_i = 0
    cdef double best_r = 0.0
    cdef bint best_served = False
    cdef Py_ssize_t a
    cdef double lo, xi, g_r, g_a, r
    cdef bint served
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
    return int(best_i), best_r, bool(best_served)


def p1_scan_bimodal(double gt_db, double gi_db,
                    double w_t, double beta_t, double phi_req_t, double lam_t, double xi_req_t,
                    double w_i, double beta_i, double phi_req_i, double lam_i, double xi_req_i,
                    double g_th, const double[::1] phi_t, const double[::1] phi_i,
                    const double[:, :, ::1] fid,
                    const double[::1] sgrid_t, const double[::1] sgrid_i):
    """Best joint (text, image) compression for a bimodal pair."""
    cdef Py_ssize_t jt = 0, ji = 0
    cdef double ft = 0.0, fi = 0.0
    _locate(sgrid_t, gt_db, &jt, &ft)
    _locate(sgrid_i, gi_db, &ji, &fi)
    cdef Py_ssize_t best_i = 0
    cdef double best_r = 0.0
    cdef bint best_served = False
    cdef Py_ssize_t a
    cdef double v_lo, v_hi, xi, g_rt, g_at, g_ri, g_ai, r
    cdef bint served
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
    return int(best_i), best_r, bool(best_served)
