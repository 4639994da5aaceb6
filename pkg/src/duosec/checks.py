"""Self-contained invariant checks runnable against any scenario.

Each check returns (ok, detail). They are deliberately small and seeded so
`duosec validate` finishes in well under a minute while still exercising
the load-bearing identities: channel construction, the distance-form rate
rewrite, surrogate tangency/bounds, solver oracles, and greedy optimality.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import bcd, geometry, metrics, sensing, trajectory
from .beamforming import (mrt_half_power_init, rate_sc, slot_matrices,
                          solve_sc_beamforming, surrogate_coeffs_sc,
                          surrogate_rate_sc)
from .scenario import ScenarioConfig, validate_scenario
from .solvers import (ChainSocpProblem, LogAffineSdpProblem, project_psd_trace,
                      solve_chain_socp, solve_log_affine_sdp)


def _random_psd(rng, m, trace_cap):
    x = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    w = x @ x.conj().T
    tr = float(np.trace(w).real)
    scale = rng.uniform(0.0, trace_cap) / tr if tr > 0 else 0.0
    return w * scale


def _straight_pair(cfg):
    return (bcd.straight_trajectory(cfg, "alice"),
            bcd.straight_trajectory(cfg, "jack"))


def check_scenario_valid(cfg, seed=0):
    try:
        validate_scenario(cfg)
    except ValueError as exc:
        return False, str(exc)
    return True, "all scenario constraints hold"


def check_channel_geometry(cfg, seed=0):
    ta, tj = _straight_pair(cfg)
    ch = geometry.build_channel_set(cfg, ta, tj)
    worst = 0.0
    for name, dist in (("h_ab", ch.d_ab), ("h_ae", ch.d_ae),
                       ("h_jb", ch.d_jb), ("h_je", ch.d_je)):
        vec = getattr(ch, name)
        mags = np.abs(vec)
        want = np.sqrt(cfg.pathloss_ref) / dist
        worst = max(worst, float(np.max(np.abs(mags - want[:, None]))))
    steer = np.abs(np.abs(ch.a_at) - 1.0).max()
    ok = worst <= 1e-12 and steer <= 1e-12
    return ok, f"channel magnitude err {worst:.2e}, steering modulus err {steer:.2e}"


def check_rate_rewrite(cfg, seed=0, n_points=20, tol=1e-9):
    rng = np.random.default_rng(seed)
    ta, tj = _straight_pair(cfg)
    ch = geometry.build_channel_set(cfg, ta, tj)
    n = cfg.n_slots
    w_a = np.zeros((n, cfg.n_antennas, cfg.n_antennas), complex)
    w_j = np.zeros_like(w_a)
    for s in range(n):
        w_a[s], w_j[s] = mrt_half_power_init(slot_matrices(ch, s), cfg)
    worst = 0.0
    for _ in range(n_points):
        s = int(rng.integers(0, n))
        which = "alice" if rng.random() < 0.5 else "jack"
        u = rng.uniform([-20.0, -40.0], [120.0, 80.0])
        wp_a = ta.waypoints.copy()
        wp_j = tj.waypoints.copy()
        (wp_a if which == "alice" else wp_j)[s + 1] = u
        ch2 = geometry.build_channel_set(cfg, wp_a, wp_j)
        g_b = metrics.sinr_sc(w_a[s], w_j[s], ch2.slot_outer("h_ab", s),
                              ch2.slot_outer("h_jb", s), cfg.residual_jam_bob,
                              cfg.noise_power["bob"])
        g_e = metrics.sinr_sc(w_a[s], w_j[s], ch2.slot_outer("h_ae", s),
                              ch2.slot_outer("h_je", s), cfg.residual_jam_eve,
                              cfg.noise_power["eve"])
        ref = metrics.secrecy_rate(g_b, g_e, clamp=False)
        other = (tj if which == "alice" else ta).waypoints[s + 1]
        got = trajectory.rewritten_rate(u, which, other, w_a[s], w_j[s], cfg)
        worst = max(worst, abs(got - ref))
    return worst <= tol, f"worst |rewritten - metrics| = {worst:.2e} over {n_points} points"


def check_trajectory_gradients(cfg, seed=0):
    rng = np.random.default_rng(seed)
    ta, tj = _straight_pair(cfg)
    ch = geometry.build_channel_set(cfg, ta, tj)
    n = cfg.n_slots
    w_a = np.zeros((n, cfg.n_antennas, cfg.n_antennas), complex)
    w_j = np.zeros_like(w_a)
    for s in range(n):
        w_a[s], w_j[s] = mrt_half_power_init(slot_matrices(ch, s), cfg)
    try:
        for which, base, other in (("alice", ta, tj), ("jack", tj, ta)):
            jitter = np.vstack([np.zeros(2), rng.uniform(-3, 3, (n, 2))])
            moved = trajectory.Trajectory(base.waypoints + jitter, base.altitude)
            trajectory.fot_gradient(which, moved, other, w_a, w_j, cfg,
                                    verify=True)
    except ValueError as exc:
        return False, str(exc)
    return True, "analytic gradients match finite differences for both UAVs"


def check_sc_surrogate(cfg, seed=0, n_pairs=40, tol=1e-9):
    rng = np.random.default_rng(seed)
    ta, tj = _straight_pair(cfg)
    ch = geometry.build_channel_set(cfg, ta, tj)
    s = cfg.n_slots // 2
    mats = slot_matrices(ch, s)
    m = cfg.n_antennas
    p_a, p_j = cfg.p_max["alice"], cfg.p_max["jack"]
    worst_gap = -np.inf
    worst_tan = 0.0
    for _ in range(n_pairs):
        w_a0 = _random_psd(rng, m, p_a)
        w_j0 = _random_psd(rng, m, p_j)
        coeffs = surrogate_coeffs_sc(w_a0, w_j0, mats, cfg)
        tan = abs(surrogate_rate_sc(w_a0, w_j0, coeffs, w_a0, w_j0, mats, cfg)
                  - rate_sc(w_a0, w_j0, mats, cfg))
        worst_tan = max(worst_tan, tan)
        w_a = _random_psd(rng, m, p_a)
        w_j = _random_psd(rng, m, p_j)
        gap = (surrogate_rate_sc(w_a, w_j, coeffs, w_a0, w_j0, mats, cfg)
               - rate_sc(w_a, w_j, mats, cfg))
        worst_gap = max(worst_gap, gap)
    ok = worst_tan <= tol and worst_gap <= tol
    return ok, f"tangency {worst_tan:.2e}, worst bound gap {worst_gap:.2e}"


def check_scs_surrogate(cfg, seed=0, n_pairs=40, tol=1e-9):
    rng = np.random.default_rng(seed)
    ta, tj = _straight_pair(cfg)
    ch = geometry.build_channel_set(cfg, ta, tj)
    s = cfg.n_slots // 2
    mats = slot_matrices(ch, s)
    m = cfg.n_antennas
    p_a, p_j = cfg.p_max["alice"], cfg.p_max["jack"]
    worst_gap = -np.inf
    worst_tan = 0.0
    for _ in range(n_pairs):
        w_a0 = _random_psd(rng, m, 0.5 * p_a)
        r_r0 = _random_psd(rng, m, 0.5 * p_a)
        w_j0 = _random_psd(rng, m, p_j)
        coeffs = sensing.surrogate_coeffs_scs(w_a0, w_j0, r_r0, mats, cfg)
        tan = abs(sensing.surrogate_rate_scs(w_a0, w_j0, r_r0, coeffs,
                                             w_a0, w_j0, r_r0, mats, cfg)
                  - sensing.rate_scs(w_a0, w_j0, r_r0, mats, cfg))
        worst_tan = max(worst_tan, tan)
        w_a = _random_psd(rng, m, 0.5 * p_a)
        r_r = _random_psd(rng, m, 0.5 * p_a)
        w_j = _random_psd(rng, m, p_j)
        gap = (sensing.surrogate_rate_scs(w_a, w_j, r_r, coeffs,
                                          w_a0, w_j0, r_r0, mats, cfg)
               - sensing.rate_scs(w_a, w_j, r_r, mats, cfg))
        worst_gap = max(worst_gap, gap)
    ok = worst_tan <= tol and worst_gap <= tol
    return ok, f"tangency {worst_tan:.2e}, worst bound gap {worst_gap:.2e}"


def check_solver_oracles(cfg, seed=0):
    errs = []
    got = project_psd_trace(np.diag([2.0, -1.0]).astype(complex), 10.0)
    errs.append(np.max(np.abs(got - np.diag([2.0, 0.0]))))

    rng = np.random.default_rng(seed)
    m = 3
    x = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    c = x @ x.conj().T
    prob = LogAffineSdpProblem(
        dim=m, n_vars=1, trace_groups=(((0,), 2.0),),
        log_offsets=[1.0], log_coeffs=[[np.zeros((m, m), complex)]],
        linear_coeffs=[c], constant=0.0)
    _, rep = solve_log_affine_sdp(prob, tol=1e-9)
    lam = float(np.linalg.eigvalsh(c)[-1])
    errs.append(abs(rep.objective - 2.0 * lam) / (2.0 * lam))

    chain = ChainSocpProblem(
        objective=np.array([[0.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),
        start=np.array([-5.0, 0.0]), end=np.array([5.0, 0.0]),
        edge_limit=10.0)
    u, rep = solve_chain_socp(chain, tol=1e-9)
    errs.append(abs(u[1, 1] - np.sqrt(75.0)))
    worst = float(max(errs))
    return worst <= 1e-6, f"worst oracle error {worst:.2e}"


def _brute_force_assignment(weights, per_target):
    k, n = weights.shape
    best = np.inf
    slots = range(1, n + 1)
    for combo1 in itertools.combinations(slots, per_target):
        cost1 = sum(weights[0][s - 1] for s in combo1)
        if k == 1:
            best = min(best, cost1)
            continue
        rest = [s for s in slots if s not in combo1]
        for combo2 in itertools.combinations(rest, per_target):
            best = min(best, cost1 + sum(weights[1][s - 1] for s in combo2))
    return best


def check_greedy_optimality(cfg, seed=0, n_instances=20):
    rng = np.random.default_rng(seed)
    for i in range(n_instances):
        k = int(rng.integers(1, 3))
        per = int(rng.integers(1, 3))
        n = int(rng.integers(k * per, 9))
        weights = rng.uniform(1.0, 100.0, size=(k, n))
        assignment = sensing.greedy_select(weights, per)
        total = sum(weights[t][s - 1]
                    for t, slots in enumerate(assignment.slots_by_target)
                    for s in slots)
        # step-optimality: each target's picks beat every slot left over
        taken = set()
        for t, slots in enumerate(assignment.slots_by_target):
            pool = [s for s in range(1, n + 1) if s not in taken]
            rest = [s for s in pool if s not in slots]
            if rest and slots:
                if max(weights[t][s - 1] for s in slots) > \
                        min(weights[t][s - 1] for s in rest) + 1e-12:
                    return False, f"instance {i}: target {t + 1} not step-optimal"
            taken.update(slots)
        bound = _brute_force_assignment(weights, per)
        if total < bound - 1e-9:
            return False, f"instance {i}: greedy {total} beat the exhaustive bound {bound}"
    return True, f"{n_instances} random instances step-optimal and >= brute-force bound"


def check_beamforming_slot(cfg, seed=0):
    ta, tj = _straight_pair(cfg)
    ch = geometry.build_channel_set(cfg, ta, tj)
    s = cfg.n_slots // 2
    mats = slot_matrices(ch, s)
    w_a, w_j, info = solve_sc_beamforming(mats, cfg)
    base_a, base_j = mrt_half_power_init(mats, cfg)
    base = rate_sc(base_a, base_j, mats, cfg)
    tr_a = float(np.trace(w_a).real)
    tr_j = float(np.trace(w_j).real)
    tol = cfg.algo.solver_tol
    ok = (info.rate >= base - 1e-9
          and tr_a <= cfg.p_max["alice"] * (1 + 1e-9) + tol
          and tr_j <= cfg.p_max["jack"] * (1 + 1e-9) + tol
          and info.rank_one_ok)
    return ok, (f"rate {info.rate:.4f} vs init {base:.4f}, traces "
                f"({tr_a:.4f}, {tr_j:.4f}), rank ok {info.rank_one_ok}")


def check_m1_degenerate(cfg, seed=0):
    from dataclasses import replace
    small = replace(cfg, n_antennas=1)
    ta, tj = _straight_pair(small)
    ch = geometry.build_channel_set(small, ta, tj)
    s = small.n_slots // 2
    mats = slot_matrices(ch, s)
    w_a, w_j, info = solve_sc_beamforming(mats, small)
    got = trajectory.rewritten_rate(ta.waypoints[s + 1], "alice",
                                    tj.waypoints[s + 1], w_a, w_j, small)
    want = rate_sc(w_a, w_j, mats, small)
    ok = abs(got - want) <= 1e-9 and np.isfinite(info.rate)
    return ok, f"scalar-antenna rate rewrite diff {abs(got - want):.2e}"


CHECKS = (
    ("scenario-valid", check_scenario_valid),
    ("channel-geometry", check_channel_geometry),
    ("rate-rewrite-equivalence", check_rate_rewrite),
    ("trajectory-gradients", check_trajectory_gradients),
    ("sc-surrogate-bound", check_sc_surrogate),
    ("scs-surrogate-bound", check_scs_surrogate),
    ("solver-oracles", check_solver_oracles),
    ("greedy-optimality", check_greedy_optimality),
    ("beamforming-slot", check_beamforming_slot),
    ("m1-degenerate", check_m1_degenerate),
)


def run_all(cfg: ScenarioConfig, seed: int = 0):
    """[(name, ok, detail)] for every registered check."""
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(cfg, seed=seed)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results
