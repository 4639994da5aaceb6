import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from duosec import bcd, geometry


def test_distance_oracle():
    # 3-4-12 box: sqrt(9 + 16 + 144) = 13
    assert geometry.distance(np.array([3.0, 4.0]), 12.0,
                             np.array([0.0, 0.0])) == pytest.approx(13.0)


def test_cos_aod_is_height_over_distance():
    assert geometry.cos_aod(12.0, 13.0) == pytest.approx(12.0 / 13.0)


def test_steering_vector_overhead_alternates_sign():
    # cos(theta) = 1 -> phase pi per element at half-wavelength spacing
    a = geometry.steering_vector(4, 0.5, 1.0)
    assert np.allclose(a, [1, -1, 1, -1])


def test_steering_vector_phase_law():
    a = geometry.steering_vector(5, 0.5, 0.6)
    want = np.exp(1j * 2 * np.pi * 0.5 * 0.6 * np.arange(5))
    assert np.allclose(a, want)


@given(st.floats(-1, 1), st.integers(1, 16))
def test_steering_vector_unit_modulus(cos_theta, m):
    a = geometry.steering_vector(m, 0.5, cos_theta)
    assert np.allclose(np.abs(a), 1.0)


def test_channel_vector_magnitude():
    h = geometry.channel_vector(4, 0.5, 1e-3, 0.0,
                                np.array([30.0, 40.0]), np.array([0.0, 0.0]))
    assert np.allclose(np.abs(h), math.sqrt(1e-3) / 50.0)


def test_build_channel_set_shapes(table1):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    ch = geometry.build_channel_set(table1, ta, tj)
    n, m, k = table1.n_slots, table1.n_antennas, len(table1.targets)
    assert ch.h_ab.shape == (n, m)
    assert ch.d_ab.shape == (n,)
    assert ch.a_at.shape == (n, k, m)
    assert ch.d_jt.shape == (n, k)
    # channels correspond to the flown waypoints 1..N, not the start point
    d0 = geometry.distance(ta.waypoints[1], table1.height["alice"],
                           np.asarray(table1.bob_pos))
    assert ch.d_ab[0] == pytest.approx(d0)


def test_slot_outer_matches_outer_product(table1):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    ch = geometry.build_channel_set(table1, ta, tj)
    h = ch.h_ae[3]
    assert np.allclose(ch.slot_outer("h_ae", 3), np.outer(h, h.conj()))


def test_build_channel_set_rejects_nonfinite(table1):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    wp = ta.waypoints.copy()
    wp[2, 0] = np.nan
    with pytest.raises(ValueError):
        geometry.build_channel_set(table1, wp, tj.waypoints)
