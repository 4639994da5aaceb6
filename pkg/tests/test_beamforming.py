import math

import numpy as np
import pytest

from conftest import random_psd
from duosec import bcd, geometry
from duosec.beamforming import (BeamformingPlan, SlotMatrices,
                                extract_rank_one, mrt_half_power_init,
                                rank_ratio, rate_sc, slot_matrices,
                                solve_sc_beamforming, surrogate_coeffs_sc,
                                surrogate_rate_sc)

LOG2E = math.log2(math.e)


def _unit_mats(m=4):
    e11 = np.zeros((m, m), complex)
    e11[0, 0] = 1.0
    return SlotMatrices(h_ab=e11, h_ae=e11, h_jb=e11, h_je=e11)


def test_surrogate_slope_spot_values(table1):
    # traces of 1e-7 on every expansion term with the reference residuals
    # and -80 dBm noise pin the linearization slopes in closed form
    m = table1.n_antennas
    mats = _unit_mats(m)
    w0 = np.zeros((m, m), complex)
    w0[0, 0] = 1e-7
    coeffs = surrogate_coeffs_sc(w0, w0, mats, table1)
    assert coeffs.b == pytest.approx(LOG2E / 2.0001e-7, rel=1e-12)
    assert coeffs.b == pytest.approx(7.2130e6, rel=1e-4)
    assert coeffs.c == pytest.approx(LOG2E / 1.01e-9, rel=1e-12)
    assert coeffs.c == pytest.approx(1.42843e9, rel=1e-4)


def test_surrogate_offset_zero_expansion(table1):
    m = table1.n_antennas
    mats = _unit_mats(m)
    zero = np.zeros((m, m), complex)
    coeffs = surrogate_coeffs_sc(zero, zero, mats, table1)
    want = math.log2(table1.noise_power["eve"]) + math.log2(
        table1.noise_power["bob"])
    assert coeffs.a == pytest.approx(want, rel=1e-12)


def test_surrogate_tangent_and_bounding(table1, rng):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    ch = geometry.build_channel_set(table1, ta, tj)
    mats = slot_matrices(ch, 7)
    m = table1.n_antennas
    for _ in range(25):
        w_a0 = random_psd(rng, m, table1.p_max["alice"])
        w_j0 = random_psd(rng, m, table1.p_max["jack"])
        coeffs = surrogate_coeffs_sc(w_a0, w_j0, mats, table1)
        at_exp = surrogate_rate_sc(w_a0, w_j0, coeffs, w_a0, w_j0, mats,
                                   table1)
        assert at_exp == pytest.approx(rate_sc(w_a0, w_j0, mats, table1),
                                       abs=1e-9)
        w_a = random_psd(rng, m, table1.p_max["alice"])
        w_j = random_psd(rng, m, table1.p_max["jack"])
        bound = surrogate_rate_sc(w_a, w_j, coeffs, w_a0, w_j0, mats, table1)
        assert bound <= rate_sc(w_a, w_j, mats, table1) + 1e-9


def test_rank_ratio_and_extraction(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    w = np.outer(v, v.conj())
    assert rank_ratio(w) == pytest.approx(1.0)
    vec, ok = extract_rank_one(w)
    assert ok
    assert np.linalg.norm(np.outer(vec, vec.conj()) - w) <= 1e-9
    spread = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    assert rank_ratio(spread) == pytest.approx(0.5)
    _, ok = extract_rank_one(spread)
    assert not ok


def test_mrt_half_power_init_traces(table1):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    ch = geometry.build_channel_set(table1, ta, tj)
    w_a, w_j = mrt_half_power_init(slot_matrices(ch, 0), table1)
    assert np.trace(w_a).real == pytest.approx(table1.p_max["alice"] / 2)
    assert np.trace(w_j).real == pytest.approx(table1.p_max["jack"] / 2)
    assert rank_ratio(w_a) == pytest.approx(1.0)


def test_solve_sc_beamforming_slot(table1):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    ch = geometry.build_channel_set(table1, ta, tj)
    mats = slot_matrices(ch, 9)
    w_a, w_j, info = solve_sc_beamforming(mats, table1)
    init = rate_sc(*mrt_half_power_init(mats, table1), mats, table1)
    assert info.rate >= init - 1e-9
    assert info.rate == pytest.approx(rate_sc(w_a, w_j, mats, table1))
    tol = table1.algo.solver_tol
    assert np.trace(w_a).real <= table1.p_max["alice"] + 1e-6
    assert np.trace(w_j).real <= table1.p_max["jack"] + 1e-6
    assert info.rank_one_ok
    assert min(info.rank_ratio_alice, info.rank_ratio_jack) >= \
        table1.algo.rank_one_ratio_min


def test_solve_sc_beamforming_never_regresses_init(table1, rng):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    ch = geometry.build_channel_set(table1, ta, tj)
    mats = slot_matrices(ch, 4)
    m = table1.n_antennas
    w_a0 = random_psd(rng, m, table1.p_max["alice"])
    w_j0 = random_psd(rng, m, table1.p_max["jack"])
    base = rate_sc(w_a0, w_j0, mats, table1)
    w_a, w_j, info = solve_sc_beamforming(mats, table1, init=(w_a0, w_j0))
    assert info.rate >= base - 1e-9


def test_beamforming_plan_residuals(table1, rng):
    n, m = 3, table1.n_antennas
    w_a = np.stack([random_psd(rng, m, table1.p_max["alice"] / 2)
                    for _ in range(n)])
    w_j = np.stack([random_psd(rng, m, table1.p_max["jack"] / 2)
                    for _ in range(n)])
    plan = BeamformingPlan.from_matrices(w_a, w_j)
    res_a, res_j = plan.power_residuals(table1)
    want_a = np.einsum("nii->n", w_a).real - table1.p_max["alice"]
    assert np.allclose(res_a, want_a)
    assert np.all(res_j <= 0)
    assert plan.r_r.shape == w_a.shape and np.all(plan.r_r == 0)
