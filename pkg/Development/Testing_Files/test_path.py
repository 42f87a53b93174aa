"""
Test script to verify path lookup along straight and curved roads
"""
import numpy as np
import pytest

from rendezvous.errors import RangeError
from rendezvous.path import Path, Segment, path_from_segments, path_lookup, straight_path


def turn_path():
    return Path((Segment(1200.0, 0.0), Segment(35.0 * np.pi / 2, 1.0 / 35.0), Segment(1200.0, 0.0)))


def test_straight_path_lookup():
    path = straight_path(1000.0, chi0=np.pi / 4)
    sigma, chi, x, y = path_lookup(path, 100.0)
    assert sigma == 0.0
    assert chi == pytest.approx(np.pi / 4)
    assert (x, y) == pytest.approx((100 / np.sqrt(2), 100 / np.sqrt(2)))


def test_turn_geometry():
    path = turn_path()
    assert path.total_length == pytest.approx(2400.0 + 35.0 * np.pi / 2)
    end_of_arc = 1200.0 + 35.0 * np.pi / 2
    point = path.lookup(end_of_arc - 1e-9)
    assert point.chi == pytest.approx(np.pi / 2, abs=1e-9)
    assert (point.x, point.y) == pytest.approx((1235.0, 35.0), abs=1e-6)
    sigma, chi, x, y = path.lookup(path.total_length)
    assert sigma == 0.0
    assert (x, y) == pytest.approx((1235.0, 1235.0), abs=1e-6)


def test_heading_inside_arc():
    path = turn_path()
    sigma, chi = path.heading(1200.0 + 35.0)
    assert sigma == pytest.approx(1.0 / 35.0)
    assert chi == pytest.approx(1.0)


def test_vectorized_lookup_matches_scalar():
    path = turn_path()
    s = np.linspace(0.0, path.total_length, 57)
    vec = path.lookup(s)
    for k in (0, 20, 30, 56):
        scalar = path.lookup(float(s[k]))
        assert vec.x[k] == pytest.approx(scalar.x)
        assert vec.chi[k] == pytest.approx(scalar.chi)


def test_position_is_continuous_at_joints():
    path = turn_path()
    for joint in path.joints:
        before = path.lookup(joint - 1e-7)
        after = path.lookup(joint + 1e-7)
        assert (before.x, before.y) == pytest.approx((after.x, after.y), abs=1e-6)


def test_out_of_range():
    path = straight_path(100.0)
    with pytest.raises(RangeError):
        path.lookup(100.5)
    with pytest.raises(RangeError):
        path.heading(-1.0)


def test_extended_path():
    path = straight_path(100.0, chi0=0.3)
    assert path.extended(50.0) is path
    longer = path.extended(250.0)
    assert longer.total_length == pytest.approx(250.0)
    assert longer.lookup(200.0).chi == pytest.approx(0.3)


def test_path_from_segments():
    path = path_from_segments([{"length": 10.0}, {"length": 5.0, "curvature": 0.1}], chi0=0.2)
    assert path.segments == (Segment(10.0, 0.0), Segment(5.0, 0.1))
    assert path.to_dict()["segments"][1] == {"length": 5.0, "curvature": 0.1}
    with pytest.raises(ValueError):
        Segment(0.0)
