"""dB / dBm / linear unit conversions used throughout the simulator."""
from __future__ import annotations

import numpy as np


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("linear value must be positive for dB conversion")
    return 10.0 * np.log10(x)


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(w):
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("power must be positive for dBm conversion")
    return 10.0 * np.log10(w) + 30.0


def dbm_to_milliwatts(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)
