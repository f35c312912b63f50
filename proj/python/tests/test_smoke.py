import math

import numpy as np
import pytest

import krausfold


def test_identity_channel_is_complete():
    assert krausfold.completeness_defect([np.eye(3)]) == pytest.approx(0.0, abs=1e-15)
    assert krausfold.choi_rank([np.eye(2)]) == 1


def test_dephasing_distance_from_identity():
    ops = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    assert krausfold.channel_distance([np.eye(2)], ops) == pytest.approx(math.sqrt(2.0), abs=1e-12)


@pytest.mark.parametrize("regime,bound", [("qubit-io", 4), ("qutrit-sio", 13)])
def test_reduction_hits_bound(regime, bound):
    ops = krausfold.sample_channel(regime, seed=5)
    out = krausfold.reduce(ops, regime)
    assert out["status"] in ("Reduced", "FallbackUsed")
    assert len(out["operators"]) <= bound
    assert krausfold.channel_distance(ops, out["operators"]) <= 1e-9


def test_qutrit_io_stops_at_rank_obstruction():
    ops = krausfold.sample_channel("qutrit-io", seed=1)
    out = krausfold.reduce(ops, "qutrit-io")
    assert out["status"] == "NotReduced"
    assert out["op_count_after"] == 36
    assert out["choi_distance"] <= 1e-9


def test_bloch_round_trip_and_identity_conditions():
    t = [0.3, 0, 0, 0, 0, 0, 0, 0.3]
    rho = krausfold.bloch_to_density(t)
    assert np.allclose(krausfold.density_to_bloch(rho), t, atol=1e-14)
    m = krausfold.push_forward([np.eye(3)], t)
    report = krausfold.check_conditions(t, m)
    assert report[1]["applicable"] and report[1]["satisfied"]


def test_unphysical_state_raises():
    with pytest.raises(ValueError):
        krausfold.bloch_to_density([1.0, 1.0, 0, 0, 0, 0, 0, 0])


def test_class_counts():
    assert krausfold.class_count("qutrit-io") == 39
    assert krausfold.class_count("qutrit-sio") == 15
