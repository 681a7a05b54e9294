import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stormweave.geo import (
    forward_bearing,
    great_circle_deg,
    motion_vector,
    motion_vectors,
    to_unit_xyz,
    unwrap_lon,
    wrap_lon,
)

coords = st.tuples(
    st.floats(min_value=-89.0, max_value=89.0),
    st.floats(min_value=-179.0, max_value=179.0),
)


def test_identical_points():
    assert great_circle_deg(12.5, -40.0, 12.5, -40.0) == 0.0


def test_equatorial_degree():
    assert great_circle_deg(0.0, 0.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_pole_arc():
    assert great_circle_deg(0.0, 0.0, 90.0, 0.0) == pytest.approx(90.0, abs=1e-12)


@given(coords, coords)
def test_symmetric_and_nonnegative(a, b):
    d1 = great_circle_deg(a[0], a[1], b[0], b[1])
    d2 = great_circle_deg(b[0], b[1], a[0], a[1])
    assert d1 >= 0.0
    assert d1 == pytest.approx(d2, abs=1e-12)
    assert d1 <= 180.0 + 1e-12


def test_wrap_lon_convention():
    assert wrap_lon(-180.0) == 180.0
    assert wrap_lon(180.0) == 180.0
    assert wrap_lon(190.0) == -170.0
    assert wrap_lon(0.0) == 0.0
    assert wrap_lon(360.0) == 0.0


def test_unwrap_antimeridian():
    out = unwrap_lon([179.5, -179.5, -179.0])
    assert np.allclose(out, [179.5, 180.5, 181.0])


def test_unit_vectors():
    xyz = to_unit_xyz([0.0, 90.0], [0.0, 0.0])
    assert np.allclose(xyz[0], [1, 0, 0], atol=1e-15)
    assert np.allclose(xyz[1], [0, 0, 1], atol=1e-15)


def test_due_east_motion_vector():
    # east = 0 bearing convention: due-east motion at wind 50 gives (50, 0)
    vx, vy = motion_vector(10.0, 70.0, 10.0, 71.0, 50.0)
    assert (vx, vy) == (50.0, 0.0)


def test_zero_wind_motion_vector():
    vx, vy = motion_vector(10.0, 70.0, 11.0, 71.0, 0.0)
    assert (vx, vy) == (0.0, 0.0)


def test_stationary_carries_heading():
    # eastward step then a stall: the stalled point keeps the east heading
    lat = np.array([10.0, 10.0, 10.0])
    lon = np.array([70.0, 71.0, 71.0])
    wind = np.array([30.0, 35.0, 40.0])
    vx, vy = motion_vectors(lat, lon, wind)
    assert (vx[2], vy[2]) == (40.0, 0.0)


def test_first_point_uses_lookahead_bearing():
    lat = np.array([10.0, 10.0])
    lon = np.array([70.0, 71.0])
    wind = np.array([25.0, 30.0])
    vx, vy = motion_vectors(lat, lon, wind)
    assert (vx[0], vy[0]) == (25.0, 0.0)


def test_stationary_scalar_requires_carried_bearing():
    with pytest.raises(ValueError):
        motion_vector(10.0, 70.0, 10.0, 70.0, 30.0)
    vx, vy = motion_vector(10.0, 70.0, 10.0, 70.0, 30.0, carried_bearing=0.0)
    assert (vx, vy) == (30.0, 0.0)


def test_northward_bearing():
    b = forward_bearing(10.0, 70.0, 11.0, 70.0)
    assert b == pytest.approx(math.pi / 2, abs=1e-12)
