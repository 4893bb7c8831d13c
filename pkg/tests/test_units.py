import numpy as np
import pytest

from semqoe.units import (db_to_linear, dbm_to_milliwatts, dbm_to_watts, linear_to_db,
                          watts_to_dbm)


def test_known_values():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(10.0) == 10.0
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-15)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-15)
    assert dbm_to_milliwatts(0.0) == 1.0


def test_round_trips_within_1e12():
    rng = np.random.default_rng(0)
    db = rng.uniform(-120.0, 60.0, size=200)
    assert np.allclose(linear_to_db(db_to_linear(db)), db, rtol=1e-12, atol=1e-12)
    dbm = rng.uniform(-100.0, 40.0, size=200)
    assert np.allclose(watts_to_dbm(dbm_to_watts(dbm)), dbm, rtol=1e-12, atol=1e-12)


def test_nonpositive_rejected():
    with pytest.raises(ValueError):
        linear_to_db(0.0)
    with pytest.raises(ValueError):
        watts_to_dbm(-1.0)
