from dataclasses import replace

import numpy as np
import pytest

from duosec import baselines, metrics
from duosec.baselines import (SCHEMES, evaluate_scheme, fhf_trajectory,
                              mrt_beamformer)


def test_fhf_waypoints_reference_geometry(table1):
    ta = fhf_trajectory(table1, "alice", "bob")
    wp = ta.waypoints
    bob = np.asarray(table1.bob_pos)
    d_out = np.linalg.norm(bob)  # start is the origin
    d_ret = np.linalg.norm(np.asarray(table1.uav_final["alice"]) - bob)
    assert d_out == pytest.approx(np.sqrt(5200.0))
    assert d_ret == pytest.approx(np.sqrt(7200.0))
    # 8 outbound slots (partial arrival step), hover through slot 11,
    # 9 return slots (partial first step)
    assert np.allclose(wp[0], [0.0, 0.0])
    for i in range(8, 12):
        assert np.allclose(wp[i], bob, atol=1e-9)
    assert np.allclose(wp[-1], table1.uav_final["alice"])
    steps = ta.steps()
    assert steps.max() <= table1.slot_displacement + 1e-9
    assert steps[:7].max() == pytest.approx(10.0)
    assert steps[7] == pytest.approx(d_out - 70.0)  # ~2.111 m arrival hop
    assert steps[8:11].max() == pytest.approx(0.0)
    assert steps[11] == pytest.approx(d_ret - 80.0)  # ~4.853 m departure hop
    assert np.allclose(steps[12:], 10.0)


def test_fhf_jack_hovers_over_eve(table1):
    tj = fhf_trajectory(table1, "jack", "eve")
    eve = np.asarray(table1.eve_pos)
    dists = np.linalg.norm(tj.waypoints - eve, axis=1)
    assert dists.min() == pytest.approx(0.0, abs=1e-9)
    assert tj.altitude == table1.height["jack"]


def test_fhf_exact_leg_multiples(table1):
    cfg = replace(table1, bob_pos=(40.0, 0.0))
    ta = fhf_trajectory(cfg, "alice", "bob")
    assert np.allclose(ta.waypoints[4], [40.0, 0.0])
    assert ta.steps()[3] == pytest.approx(10.0)


def test_fhf_hover_above_start(table1):
    cfg = replace(table1, bob_pos=(0.0, 0.0))
    ta = fhf_trajectory(cfg, "alice", "bob")
    assert np.allclose(ta.waypoints[5], [0.0, 0.0])
    assert np.allclose(ta.waypoints[-1], table1.uav_final["alice"])


def test_fhf_unreachable_hover(table1):
    cfg = replace(table1, n_slots=10, task_duration=5.0)
    with pytest.raises(ValueError, match="unreachable"):
        fhf_trajectory(cfg, "alice", "bob")


def test_fhf_rejects_unknown_node(table1):
    with pytest.raises(ValueError, match="bob|eve"):
        fhf_trajectory(table1, "alice", "carol")


def test_mrt_beamformer_properties(rng):
    h = rng.normal(size=6) + 1j * rng.normal(size=6)
    w = mrt_beamformer(h, 2.5)
    assert np.linalg.norm(w) ** 2 == pytest.approx(2.5, rel=1e-12)
    # parallel to the channel: the inner product meets Cauchy-Schwarz
    assert abs(np.vdot(h, w)) ** 2 == pytest.approx(
        2.5 * np.linalg.norm(h) ** 2, rel=1e-12)
    assert not mrt_beamformer(h, 0.0).any()
    with pytest.raises(ValueError, match="nonnegative"):
        mrt_beamformer(h, -1.0)
    with pytest.raises(ValueError, match="zero channel"):
        mrt_beamformer(np.zeros(6, complex), 1.0)


def test_unknown_scheme_rejected(table1):
    with pytest.raises(ValueError, match="unknown scheme"):
        evaluate_scheme("mystery", table1)


def test_fhf_power_split(scheme_solutions, table1):
    sol = scheme_solutions["fhf"]
    m = table1.n_antennas
    eye = np.eye(m)
    comm = baselines.FHF_COMM_POWER_SHARE * table1.p_max["alice"]
    for s in range(table1.n_slots):
        tr_a = metrics.trace_inner(eye, sol.plan.w_a[s]).real
        tr_r = metrics.trace_inner(eye, sol.plan.r_r[s]).real
        if sol.assignment[s] >= 0:
            assert tr_a == pytest.approx(comm, rel=1e-9)
            assert tr_r == pytest.approx(table1.p_max["alice"] - comm,
                                         rel=1e-9)
        else:
            assert tr_a == pytest.approx(table1.p_max["alice"], rel=1e-9)
            assert tr_r == 0.0
        tr_j = metrics.trace_inner(eye, sol.plan.w_j[s]).real
        assert tr_j == pytest.approx(table1.p_max["jack"], rel=1e-9)


def test_single_uav_silences_jammer(scheme_solutions):
    sol = scheme_solutions["single_uav"]
    assert not sol.plan.w_j.any()


def test_single_uav_invariant_in_jammer_power(table1):
    base = evaluate_scheme("single_uav", table1)
    boosted = evaluate_scheme(
        "single_uav", replace(table1, p_max={**table1.p_max, "jack": 10.0}))
    assert boosted.report.asr == base.report.asr
    assert np.array_equal(boosted.report.secrecy, base.report.secrecy)


def test_single_uav_colocated_receivers_zero_secrecy(table1):
    cfg = replace(table1, eve_pos=table1.bob_pos)
    sol = evaluate_scheme("single_uav", cfg)
    assert sol.report.asr == 0.0
    assert np.allclose(sol.report.secrecy, 0.0)


def test_scheme_reports_are_consistent(scheme_solutions, table1):
    for name in SCHEMES:
        sol = scheme_solutions[name]
        assert sol.extras["scheme"] == name
        assert sol.extras["wall_seconds"] >= 0.0
        rep = sol.report
        assert rep.asr == pytest.approx(float(np.mean(rep.secrecy)), rel=1e-12)
        assert len(sol.slot_labels) == table1.n_slots
        n_scs = sum(1 for lab in sol.slot_labels if lab == metrics.SCS)
        assert n_scs == table1.n_sensing_slots


def test_fhf_beamforming_improves_on_fhf(scheme_solutions):
    assert scheme_solutions["fhf_beamforming"].report.asr >= \
        scheme_solutions["fhf"].report.asr - 1e-9
    assert scheme_solutions["fhf_beamforming"].extras[
        "sca_iterations_total"] > 0
