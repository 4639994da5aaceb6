"""Compare the compiled solver kernels against the pure-Python reference.

Times the two operations the pipeline spends its life in — the log-affine
SDP step solve and the chain SOCP trajectory step — on representative
problem sizes, using the same tolerances the pipeline uses. Run with:

    python3 benchmarks/bench_backends.py [--repeats 3]
"""

import argparse
import time

import numpy as np

from duosec import bcd, geometry, trajectory
from duosec.beamforming import (mrt_half_power_init, sc_problem,
                                slot_matrices)
from duosec.scenario import default_scenario
from duosec.solvers import (ChainSocpProblem, available_backends,
                            solve_chain_socp, solve_log_affine_sdp)


def _sdp_instance(cfg):
    ta = bcd.straight_trajectory(cfg, "alice")
    tj = bcd.straight_trajectory(cfg, "jack")
    ch = geometry.build_channel_set(cfg, ta, tj)
    mats = slot_matrices(ch, 9)
    w_a0, w_j0 = mrt_half_power_init(mats, cfg)
    return sc_problem(w_a0, w_j0, mats, cfg)


def _chain_instance(cfg, n):
    ta = bcd.straight_trajectory(cfg, "alice")
    tj = bcd.straight_trajectory(cfg, "jack")
    wp = ta.waypoints[: n + 1].copy()
    m = cfg.n_antennas
    w = np.tile(cfg.p_max["alice"] / m * np.eye(m, dtype=complex), (n, 1, 1))
    wj = np.tile(cfg.p_max["jack"] / m * np.eye(m, dtype=complex), (n, 1, 1))
    surr = trajectory.fot_gradient(
        "alice", trajectory.Trajectory(wp, ta.altitude),
        trajectory.Trajectory(tj.waypoints[: n + 1], tj.altitude),
        w, wj, cfg, verify=False) if n == cfg.n_slots else None
    if surr is not None:
        rho = surr.rho
    else:
        rng = np.random.default_rng(0)
        rho = rng.normal(size=(n + 1, 2))
        rho[0] = 0.0
    return ChainSocpProblem(
        objective=rho,
        start=wp[0],
        end=wp[-1],
        edge_limit=cfg.slot_displacement,
        trust_centers=wp,
        trust_radii=0.8 * cfg.slot_displacement,
        init=wp,
    )


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    cfg = default_scenario()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")

    sdp = _sdp_instance(cfg)
    print(f"\nlog-affine SDP (dim {cfg.n_antennas}, 2 matrix variables)")
    ref = {}
    for be in backends:
        tol = 1e-8 if be == "native" else 1e-6
        secs, (x, rep) = _time(
            lambda be=be, tol=tol: solve_log_affine_sdp(sdp, tol=tol,
                                                        backend=be),
            args.repeats)
        ref[be] = (secs, rep.objective)
        print(f"  {be:9s} tol={tol:.0e}  {secs * 1e3:9.2f} ms   "
              f"objective {rep.objective:+.9f}   status {rep.status}")
    if len(ref) == 2:
        print(f"  speedup: {ref['reference'][0] / ref['native'][0]:.0f}x  "
              f"objective gap "
              f"{abs(ref['native'][1] - ref['reference'][1]):.2e}")

    for n in (4, 20):
        prob = _chain_instance(cfg, n)
        print(f"\nchain SOCP ({n} waypoints free)")
        ref = {}
        for be in backends:
            tol = 1e-8 if be == "native" else 1e-6
            secs, (x, rep) = _time(
                lambda be=be, tol=tol: solve_chain_socp(prob, tol=tol,
                                                        backend=be),
                args.repeats if be == "native" else 1)
            obj = float(np.sum(prob.objective * x))
            ref[be] = (secs, obj)
            print(f"  {be:9s} tol={tol:.0e}  {secs * 1e3:9.2f} ms   "
                  f"objective {obj:+.9f}   status {rep.status}")
        if len(ref) == 2:
            print(f"  speedup: {ref['reference'][0] / ref['native'][0]:.0f}x  "
                  f"objective gap "
                  f"{abs(ref['native'][1] - ref['reference'][1]):.2e}")


if __name__ == "__main__":
    main()
