"""Benchmark schemes: fly-hover-fly tracks, MRT beams, single-UAV variant.

Every scheme produces the same SolutionPlan/MetricsReport pair as the
optimized pipeline so the CLI and plots can treat them uniformly. The weak
baselines are evaluated honestly: slots whose beampattern floor cannot be
met are flagged infeasible rather than patched.
"""

from __future__ import annotations

import time

import numpy as np

from . import metrics
from .bcd import SolutionPlan, run_bcd
from .beamforming import (BeamformingPlan, slot_matrices,
                          solve_sc_beamforming)
from .geometry import build_channel_set, outer
from .scenario import ScenarioConfig, validate_scenario
from .sensing import (greedy_select, plan_scs, slot_target,
                      solve_scs_beamforming, weighted_distances)
from .trajectory import Trajectory, validate_trajectory

SCHEMES = ("scs_proposed", "fhf", "fhf_beamforming", "single_uav")

HOVER_NODES = {"bob": "bob_pos", "eve": "eve_pos"}

# Share of Alice's budget kept for communication in a baseline sensing slot.
FHF_COMM_POWER_SHARE = 0.9


def fhf_trajectory(cfg: ScenarioConfig, uav: str, hover_over: str) -> Trajectory:
    """Max-speed leg to the point above a ground node, hover, max-speed leg
    to the mission endpoint arriving exactly at the last slot."""
    if hover_over not in HOVER_NODES:
        raise ValueError(f"hover_over must be bob|eve, got {hover_over!r}")
    start = np.asarray(cfg.uav_initial[uav], dtype=float)
    final = np.asarray(cfg.uav_final[uav], dtype=float)
    hover = np.asarray(getattr(cfg, HOVER_NODES[hover_over]), dtype=float)
    v = cfg.slot_displacement
    n = cfg.n_slots

    d_out = float(np.linalg.norm(hover - start))
    d_ret = float(np.linalg.norm(final - hover))
    k_out = int(np.ceil(d_out / v - 1e-12))
    k_ret = int(np.ceil(d_ret / v - 1e-12))
    if k_out + k_ret > n:
        raise ValueError(
            f"{uav}: hover over {hover_over} unreachable — legs need "
            f"{d_out + d_ret:.3f} m in {k_out + k_ret} slots, but the budget "
            f"is {n} slots x {v:.3f} m")

    wp = np.tile(hover, (n + 1, 1))
    if k_out:
        unit = (hover - start) / d_out
        for i in range(k_out + 1):
            wp[i] = start + min(i * v, d_out) * unit
    else:
        wp[0] = start
    if k_ret:
        unit = (final - hover) / d_ret
        for i in range(n - k_ret, n + 1):
            wp[i] = hover + max(0.0, d_ret - (n - i) * v) * unit
    traj = Trajectory(wp, cfg.height[uav])
    validate_trajectory(traj, cfg, uav)
    return traj


def mrt_beamformer(h: np.ndarray, p: float) -> np.ndarray:
    """Full-power beam aligned with the channel: w = sqrt(P) h / ||h||."""
    h = np.asarray(h, dtype=complex)
    if p < 0:
        raise ValueError("power must be nonnegative")
    if p == 0:
        return np.zeros_like(h)
    nrm = float(np.linalg.norm(h))
    if nrm <= 0:
        raise ValueError("MRT undefined for a zero channel")
    return np.sqrt(p) * h / nrm


def _greedy_labels(cfg, traj_alice, traj_jack):
    """(labels, slot->target, SensingAssignment|None) for a baseline run."""
    n = cfg.n_slots
    if cfg.n_sensing_slots == 0:
        return [metrics.SC] * n, np.full(n, -1, dtype=int), None
    weighted = weighted_distances(traj_alice, traj_jack, cfg)
    assignment = greedy_select(weighted, cfg.slots_per_target)
    slot2target = assignment.slot_to_target(n)
    labels = [metrics.SCS if slot2target[s] >= 0 else metrics.SC
              for s in range(n)]
    return labels, slot2target, assignment


def _finish(cfg, ta, tj, w_a, w_j, r_r, labels, slot2target, assignment,
            extras) -> SolutionPlan:
    report = metrics.evaluate(cfg, ta, tj, w_a, w_j, r_r, labels, slot2target)
    return SolutionPlan(
        config=cfg,
        traj_alice=ta,
        traj_jack=tj,
        plan=BeamformingPlan.from_matrices(w_a, w_j, r_r),
        slot_labels=labels,
        assignment=slot2target,
        sensing=assignment,
        asr_history=[report.asr],
        report=report,
        extras=extras,
    )


def evaluate_scheme(scheme: str, cfg: ScenarioConfig,
                    backend: str | None = None):
    """Run one scheme end to end and return the finished SolutionPlan."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    validate_scenario(cfg)
    t0 = time.time()

    if scheme == "scs_proposed":
        sol = run_bcd(cfg, backend=backend)
        sol = plan_scs(cfg, sol, backend=backend)
        sol.extras["scheme"] = scheme
        sol.extras["wall_seconds"] = time.time() - t0
        return sol

    n, m = cfg.n_slots, cfg.n_antennas
    p_a, p_j = cfg.p_max["alice"], cfg.p_max["jack"]
    ta = fhf_trajectory(cfg, "alice", "bob")
    tj = fhf_trajectory(cfg, "jack", "eve")
    jammer_on = scheme != "single_uav"
    labels, slot2target, assignment = _greedy_labels(
        cfg, ta, tj if jammer_on else None)
    ch = build_channel_set(cfg, ta, tj)

    w_a = np.zeros((n, m, m), dtype=complex)
    w_j = np.zeros((n, m, m), dtype=complex)
    r_r = np.zeros((n, m, m), dtype=complex)
    for s in range(n):
        sensing_slot = slot2target[s] >= 0
        if scheme == "fhf" and sensing_slot:
            comm = FHF_COMM_POWER_SHARE * p_a
            w_a[s] = outer(mrt_beamformer(ch.h_ab[s], comm))
            r_r[s] = (p_a - comm) / m * np.eye(m)
        else:
            w_a[s] = outer(mrt_beamformer(ch.h_ab[s], p_a))
        if jammer_on:
            w_j[s] = outer(mrt_beamformer(ch.h_je[s], p_j))

    extras = {"scheme": scheme}
    if scheme == "fhf_beamforming":
        sca_total = 0
        for s in range(n):
            mats = slot_matrices(ch, s)
            if slot2target[s] >= 0:
                sense = slot_target(ch, assignment, s, cfg)
                w_a[s], w_j[s], r_r[s], info = solve_scs_beamforming(
                    mats, sense, cfg, init=(w_a[s], w_j[s], r_r[s]),
                    backend=backend)
            else:
                w_a[s], w_j[s], info = solve_sc_beamforming(
                    mats, cfg, init=(w_a[s], w_j[s]), backend=backend)
            sca_total += info.sca_iterations
        extras["sca_iterations_total"] = sca_total

    extras["wall_seconds"] = time.time() - t0
    sol = _finish(cfg, ta, tj, w_a, w_j, r_r, labels, slot2target,
                  assignment, extras)
    return sol
