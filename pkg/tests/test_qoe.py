import math

import numpy as np
import pytest

from semqoe import qoe


def test_logistic_midpoint_exact():
    for req in (0.0, 1.0, 57.3, -4.0):
        for growth in (0.01, 1.0, 42.0):
            assert qoe.logistic_score(req, req, growth) == 0.5


def test_logistic_antisymmetry():
    rng = np.random.default_rng(0)
    for _ in range(200):
        req = float(rng.uniform(-10, 10))
        growth = float(rng.uniform(0.05, 5))
        d = float(rng.uniform(0, 8))
        s = qoe.logistic_score(req + d, req, growth) + qoe.logistic_score(req - d, req, growth)
        assert s == pytest.approx(1.0, rel=1e-12)


def test_logistic_monotone_and_bounded():
    values = np.linspace(-50, 50, 401)
    scores = [qoe.logistic_score(float(v), 0.0, 0.7) for v in values]
    assert all(0.0 <= s <= 1.0 for s in scores)
    assert all(b >= a for a, b in zip(scores, scores[1:]))
    mid = len(values) // 2
    assert all(b > a for a, b in zip(scores[mid - 5:mid + 5], scores[mid - 4:mid + 6]))


def test_logistic_hard_saturation():
    # beyond the exp clip the score is exactly 0 or 1, never a subnormal tail
    assert qoe.logistic_score(0.0, 501.0, 1.0) == 0.0
    assert qoe.logistic_score(501.0, 0.0, 1.0) == 1.0
    assert qoe.logistic_score(0.0, 499.0, 1.0) > 0.0
    assert qoe.logistic_score(30.0, 0.0, 1.0) < 1.0


def test_semantic_scores_hand_values():
    params = qoe.QoeParams(weight=0.5, rate_growth=0.2, rate_req_suts_s=60e3,
                           acc_growth=55.0, acc_req=0.85)
    scores = qoe.semantic_user_scores(params, 70e3, 0.9)
    # rate axis works in Ksuts/s: z = 0.2 * (60 - 70)
    assert scores.rate_score == pytest.approx(1.0 / (1.0 + math.exp(-2.0)), rel=1e-12)
    assert scores.acc_score == pytest.approx(1.0 / (1.0 + math.exp(55.0 * -0.05)), rel=1e-12)
    assert scores.score == pytest.approx(0.5 * scores.rate_score + 0.5 * scores.acc_score,
                                         rel=1e-12)


def test_semantic_weight_extremes():
    base = dict(rate_growth=0.2, rate_req_suts_s=60e3, acc_growth=55.0, acc_req=0.85)
    rate_only = qoe.semantic_user_scores(qoe.QoeParams(weight=1.0, **base), 80e3, 0.2)
    assert rate_only.score == rate_only.rate_score
    acc_only = qoe.semantic_user_scores(qoe.QoeParams(weight=0.0, **base), 80e3, 0.2)
    assert acc_only.score == acc_only.acc_score


def test_conventional_score_hand_value():
    params = qoe.ConvQoeParams(rate_growth=0.5, rate_req_bit_s=4e6)
    # Mbps axis: z = 0.5 * (4 - 6)
    assert qoe.conventional_user_score(params, 6e6) == pytest.approx(
        1.0 / (1.0 + math.exp(-1.0)), rel=1e-12)
    assert qoe.conventional_user_score(params, 4e6) == 0.5


def test_served_gate_uses_component_scores():
    good = qoe.UserScores(rate_score=0.9, acc_score=0.8, score=0.85)
    lopsided = qoe.UserScores(rate_score=0.99, acc_score=0.3, score=0.92)
    assert qoe.is_served(good, 0.5)
    assert not qoe.is_served(lopsided, 0.5)   # high average cannot mask a weak axis
    assert qoe.is_served(lopsided, 0.3)
    assert qoe.is_served(qoe.UserScores(0.0, 0.0, 0.0), 0.0)


def test_served_monotone_in_threshold():
    scores = qoe.UserScores(rate_score=0.61, acc_score=0.55, score=0.58)
    served = [qoe.is_served(scores, g) for g in np.linspace(0, 1, 21)]
    # once the gate fails it stays failed as the threshold grows
    assert served == sorted(served, reverse=True)


def test_param_validation():
    base = dict(rate_growth=0.2, rate_req_suts_s=60e3, acc_growth=55.0, acc_req=0.85)
    with pytest.raises(ValueError):
        qoe.QoeParams(weight=1.5, **base)
    with pytest.raises(ValueError):
        qoe.QoeParams(weight=0.5, rate_growth=0.0, rate_req_suts_s=60e3,
                      acc_growth=55.0, acc_req=0.85)
    with pytest.raises(ValueError):
        qoe.QoeParams(weight=0.5, rate_growth=0.2, rate_req_suts_s=60e3,
                      acc_growth=55.0, acc_req=1.0)
    with pytest.raises(ValueError):
        qoe.QoeParams(weight=0.5, rate_growth=0.2, rate_req_suts_s=-5.0,
                      acc_growth=55.0, acc_req=0.85)
    with pytest.raises(ValueError):
        qoe.ConvQoeParams(rate_growth=-1.0, rate_req_bit_s=4e6)
    with pytest.raises(ValueError):
        qoe.ConvQoeParams(rate_growth=0.5, rate_req_bit_s=0.0)


def test_score_input_validation():
    params = qoe.QoeParams(weight=0.5, rate_growth=0.2, rate_req_suts_s=60e3,
                           acc_growth=55.0, acc_req=0.85)
    with pytest.raises(ValueError):
        qoe.semantic_user_scores(params, -1.0, 0.5)
    with pytest.raises(ValueError):
        qoe.semantic_user_scores(params, 1.0, 1.2)
    with pytest.raises(ValueError):
        qoe.conventional_user_score(qoe.ConvQoeParams(0.5, 4e6), -1.0)
