"""Logistic QoE scoring for semantic and conventional users.

Rate scores are evaluated in Ksuts/s for semantic users and Mbps for
conventional users; the growth-rate parameters are calibrated in those units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# exponent clip keeping exp() finite; scores saturate hard at 0/1 beyond this
_EXP_CLIP = 500.0


@dataclass(frozen=True)
class QoeParams:
    """Per-user semantic QoE profile: w, beta, phi_req, lambda, xi_req."""

    weight: float                # rate-vs-accuracy preference w in [0, 1]
    rate_growth: float           # logistic growth for the rate score, per Ksuts/s
    rate_req_suts_s: float       # required semantic rate, suts/s
    acc_growth: float            # logistic growth for the accuracy score
    acc_req: float               # required fidelity in (0, 1)

    def __post_init__(self):
        if not (0.0 <= self.weight <= 1.0):
            raise ValueError("weight must lie in [0, 1]")
        if not (self.rate_growth > 0 and self.acc_growth > 0):
            raise ValueError("growth rates must be positive")
        if not (0.0 < self.acc_req < 1.0):
            raise ValueError("accuracy requirement must lie in (0, 1)")
        if not (self.rate_req_suts_s > 0):
            raise ValueError("rate requirement must be positive")


@dataclass(frozen=True)
class ConvQoeParams:
    """Per-user conventional QoE profile: beta_C and required bit rate."""

    rate_growth: float           # logistic growth per Mbps
    rate_req_bit_s: float        # required bit rate, bit/s

    def __post_init__(self):
        if not (self.rate_growth > 0):
            raise ValueError("growth rate must be positive")
        if not (self.rate_req_bit_s > 0):
            raise ValueError("rate requirement must be positive")


def logistic_score(value: float, requirement: float, growth: float) -> float:
    """1 / (1 + exp(growth * (requirement - value))); 0.5 exactly at the requirement."""
    z = growth * (requirement - value)
    if z > _EXP_CLIP:
        return 0.0
    if z < -_EXP_CLIP:
        return 1.0
    return 1.0 / (1.0 + math.exp(z))


@dataclass(frozen=True)
class UserScores:
    rate_score: float
    acc_score: float
    score: float                 # w * G_R + (1 - w) * G_A


def semantic_user_scores(params: QoeParams, phi_suts_s: float, xi: float) -> UserScores:
    if phi_suts_s < 0:
        raise ValueError("semantic rate must be nonnegative")
    if not (0.0 <= xi <= 1.0):
        raise ValueError("fidelity must lie in [0, 1]")
    g_r = logistic_score(phi_suts_s / 1e3, params.rate_req_suts_s / 1e3, params.rate_growth)
    g_a = logistic_score(xi, params.acc_req, params.acc_growth)
    return UserScores(g_r, g_a, params.weight * g_r + (1.0 - params.weight) * g_a)


def conventional_user_score(params: ConvQoeParams, bit_rate_bit_s: float) -> float:
    if bit_rate_bit_s < 0:
        raise ValueError("bit rate must be nonnegative")
    return logistic_score(bit_rate_bit_s / 1e6, params.rate_req_bit_s / 1e6, params.rate_growth)


def is_served(scores: UserScores, g_th: float) -> bool:
    """Serving gate: both component scores must reach the threshold."""
    return scores.rate_score >= g_th and scores.acc_score >= g_th
