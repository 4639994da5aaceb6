import numpy as np
import pytest

from duosec import bcd, geometry, metrics, trajectory
from duosec.beamforming import mrt_half_power_init, slot_matrices


def _mrt_beams(cfg, ta, tj):
    ch = geometry.build_channel_set(cfg, ta, tj)
    n, m = cfg.n_slots, cfg.n_antennas
    w_a = np.zeros((n, m, m), complex)
    w_j = np.zeros_like(w_a)
    for s in range(n):
        w_a[s], w_j[s] = mrt_half_power_init(slot_matrices(ch, s), cfg)
    return w_a, w_j


def test_trajectory_type_and_validation(table1):
    ta = bcd.straight_trajectory(table1, "alice")
    assert ta.n_slots == table1.n_slots
    assert np.allclose(ta.steps(), 5.0)
    trajectory.validate_trajectory(ta, table1, "alice")

    wrong_end = ta.waypoints.copy()
    wrong_end[-1] += 1.0
    with pytest.raises(ValueError):
        trajectory.validate_trajectory(
            trajectory.Trajectory(wrong_end, ta.altitude), table1, "alice")

    too_fast = ta.waypoints.copy()
    too_fast[3] += [0.0, 30.0]
    with pytest.raises(ValueError):
        trajectory.validate_trajectory(
            trajectory.Trajectory(too_fast, ta.altitude), table1, "alice")


def test_rewritten_rate_matches_metrics(table1, rng):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    w_a, w_j = _mrt_beams(table1, ta, tj)
    worst = 0.0
    for _ in range(30):
        s = int(rng.integers(0, table1.n_slots))
        which = "alice" if rng.random() < 0.5 else "jack"
        u = rng.uniform([-20, -40], [120, 80])
        wa, wj = ta.waypoints.copy(), tj.waypoints.copy()
        (wa if which == "alice" else wj)[s + 1] = u
        ch = geometry.build_channel_set(table1, wa, wj)
        g_b = metrics.sinr_sc(w_a[s], w_j[s], ch.slot_outer("h_ab", s),
                              ch.slot_outer("h_jb", s),
                              table1.residual_jam_bob,
                              table1.noise_power["bob"])
        g_e = metrics.sinr_sc(w_a[s], w_j[s], ch.slot_outer("h_ae", s),
                              ch.slot_outer("h_je", s),
                              table1.residual_jam_eve,
                              table1.noise_power["eve"])
        want = metrics.secrecy_rate(g_b, g_e, clamp=False)
        other = (tj if which == "alice" else ta).waypoints[s + 1]
        got = trajectory.rewritten_rate(u, which, other, w_a[s], w_j[s],
                                        table1)
        worst = max(worst, abs(got - want))
    assert worst <= 1e-9


def test_rewritten_rate_zero_beams(table1):
    zeros = np.zeros((table1.n_antennas,) * 2, complex)
    got = trajectory.rewritten_rate(np.array([10.0, 5.0]), "alice",
                                    np.array([20.0, -5.0]), zeros, zeros,
                                    table1)
    assert got == 0.0


def test_rewritten_rate_symmetric_receivers(table1, rng):
    # Bob and Eve colocated with equal residuals: zero for any position
    from dataclasses import replace
    cfg = replace(table1, eve_pos=table1.bob_pos,
                  residual_jam_eve=table1.residual_jam_bob,
                  noise_power={"bob": 1e-11, "eve": 1e-11})
    ta = bcd.straight_trajectory(cfg, "alice")
    tj = bcd.straight_trajectory(cfg, "jack")
    w_a, w_j = _mrt_beams(cfg, ta, tj)
    for _ in range(5):
        u = rng.uniform([0, -20], [100, 60])
        got = trajectory.rewritten_rate(u, "alice", tj.waypoints[4], w_a[3],
                                        w_j[3], cfg)
        assert abs(got) <= 1e-12


def test_surrogate_tangency_at_expansion(table1):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    w_a, w_j = _mrt_beams(table1, ta, tj)
    surr = trajectory.fot_gradient("alice", ta, tj, w_a, w_j, table1,
                                   verify=False)
    unclamped, _ = trajectory.phase_rates("alice", ta.waypoints, tj, w_a,
                                          w_j, table1)
    assert surr.phase_asr(ta.waypoints) == pytest.approx(unclamped,
                                                         abs=1e-9)


def test_fot_gradient_fd_gate_passes(table1, rng):
    ta = bcd.straight_trajectory(table1, "alice")
    tj = bcd.straight_trajectory(table1, "jack")
    w_a, w_j = _mrt_beams(table1, ta, tj)
    for which, base, other in (("alice", ta, tj), ("jack", tj, ta)):
        jitter = np.vstack([np.zeros(2),
                            rng.uniform(-3, 3, (table1.n_slots, 2))])
        moved = trajectory.Trajectory(base.waypoints + jitter, base.altitude)
        # raises on any analytic/numeric disagreement
        trajectory.fot_gradient(which, moved, other, w_a, w_j, table1,
                                verify=True)


def test_fot_gradient_scalar_antenna(table1, rng):
    from dataclasses import replace
    cfg = replace(table1, n_antennas=1)
    ta = bcd.straight_trajectory(cfg, "alice")
    tj = bcd.straight_trajectory(cfg, "jack")
    w_a, w_j = _mrt_beams(cfg, ta, tj)
    trajectory.fot_gradient("alice", ta, tj, w_a, w_j, cfg, verify=True)
    trajectory.fot_gradient("jack", tj, ta, w_a, w_j, cfg, verify=True)


def test_fot_gradient_mirror_antisymmetry(table1):
    # Bob and Eve mirror-imaged across the flight axis with equal residuals
    # and noise: the slot rate is odd in the cross-track coordinate, so on
    # the axis it vanishes and so does the along-track gradient component
    from dataclasses import replace
    cfg = replace(table1, bob_pos=(50.0, 30.0), eve_pos=(50.0, -30.0),
                  residual_jam_eve=table1.residual_jam_bob,
                  noise_power={"bob": 1e-11, "eve": 1e-11},
                  n_slots=4, task_duration=2.0, n_sensing_slots=4,
                  slots_per_target=1,
                  uav_final={"alice": (40.0, 0.0), "jack": (40.0, 0.0)})
    ta = bcd.straight_trajectory(cfg, "alice")
    tj = bcd.straight_trajectory(cfg, "jack")
    m = cfg.n_antennas
    iso_a = cfg.p_max["alice"] / m * np.eye(m, dtype=complex)
    iso_j = cfg.p_max["jack"] / m * np.eye(m, dtype=complex)
    w_a = np.tile(iso_a, (cfg.n_slots, 1, 1))
    w_j = np.tile(iso_j, (cfg.n_slots, 1, 1))
    surr = trajectory.fot_gradient("alice", ta, tj, w_a, w_j, cfg,
                                   verify=False)
    assert np.allclose(surr.alpha, 0.0, atol=1e-9)
    assert np.allclose(surr.rho[1:, 0], 0.0, atol=1e-12)
    assert np.abs(surr.rho[1:, 1]).max() > 1e-6


def test_optimize_trajectory_improves(small_cfg):
    ta = bcd.straight_trajectory(small_cfg, "alice")
    tj = bcd.straight_trajectory(small_cfg, "jack")
    w_a, w_j = _mrt_beams(small_cfg, ta, tj)
    _, base = trajectory.phase_rates("alice", ta.waypoints, tj, w_a, w_j,
                                     small_cfg)
    out, log = trajectory.optimize_trajectory("alice", ta, tj, w_a, w_j,
                                              small_cfg)
    trajectory.validate_trajectory(out, small_cfg, "alice")
    assert log["phase_asr"] >= base - 1e-9
    assert log["rounds"] >= 1


def test_optimize_trajectory_zero_objective_returns_init(small_cfg):
    ta = bcd.straight_trajectory(small_cfg, "alice")
    tj = bcd.straight_trajectory(small_cfg, "jack")
    n, m = small_cfg.n_slots, small_cfg.n_antennas
    zeros = np.zeros((n, m, m), complex)
    out, log = trajectory.optimize_trajectory("alice", ta, tj, zeros, zeros,
                                              small_cfg)
    assert np.allclose(out.waypoints, ta.waypoints)


def test_optimize_taut_chain_stays_feasible(table1):
    # endpoint exactly n_slots * slot_displacement away: the straight
    # max-speed path is the only feasible chain, and solver tolerance must
    # not let candidates breach the step limit
    from dataclasses import replace
    cfg = replace(table1, n_slots=4, task_duration=2.0, n_sensing_slots=2,
                  slots_per_target=2, targets=((20.0, 15.0),),
                  uav_final={"alice": (40.0, 0.0), "jack": (30.0, -10.0)})
    ta = bcd.straight_trajectory(cfg, "alice")
    tj = bcd.straight_trajectory(cfg, "jack")
    w_a, w_j = _mrt_beams(cfg, ta, tj)
    out, _ = trajectory.optimize_trajectory("alice", ta, tj, w_a, w_j, cfg)
    trajectory.validate_trajectory(out, cfg, "alice")
    assert out.steps().max() <= cfg.slot_displacement


def test_trust_radius_geometric_recursion():
    # three shrinks at rate 0.5 from 10 m: 10 * 0.5^3 = 1.25 m
    psi = 10.0
    for _ in range(3):
        psi *= 0.5
    assert psi == pytest.approx(1.25)
