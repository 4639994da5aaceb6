"""Sensing-slot selection and beamforming with a beampattern floor.

Slots are assigned to targets greedily by a weighted distance (UAV-to-target
legs plus the source-to-user leg), then each selected slot's beamformers are
re-solved with a dedicated sensing covariance and a minimum distance-
normalized beampattern gain toward the slot's assigned target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from .beamforming import SlotMatrices, rank_ratio, slot_matrices
from .bcd import SolutionPlan
from .geometry import build_channel_set, distance, outer
from .scenario import ScenarioConfig
from .solvers import LogAffineSdpProblem, objective_value, solve_log_affine_sdp

LOG2E = metrics.LOG2E


class SensingInfeasibleError(RuntimeError):
    """A slot cannot reach the required beampattern gain at any power split."""

    def __init__(self, slot: int, target: int, threshold: float,
                 max_gain: float):
        self.slot = slot
        self.target = target
        self.threshold = threshold
        self.max_gain = max_gain
        super().__init__(
            f"slot {slot}, target {target}: beampattern threshold "
            f"{threshold:.6e} exceeds the attainable maximum {max_gain:.6e}")


# ---------------------------------------------------------------------------
# slot selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SensingAssignment:
    """Disjoint slot sets per target, plus the weight matrix they came from."""

    slots_by_target: tuple  # K tuples of 1-based slot indices
    weighted: np.ndarray  # (K, N) meters

    def __post_init__(self):
        seen = set()
        for slots in self.slots_by_target:
            for s in slots:
                if s in seen:
                    raise ValueError(f"slot {s} assigned twice")
                seen.add(s)
        n = self.weighted.shape[1]
        if seen and (min(seen) < 1 or max(seen) > n):
            raise ValueError("slot indices must lie in [1, N]")

    @property
    def selected_slots(self) -> tuple:
        return tuple(sorted(s for slots in self.slots_by_target for s in slots))

    def slot_to_target(self, n_slots: int) -> np.ndarray:
        """(N,) map slot -> 0-based target index, -1 where unassigned."""
        out = np.full(n_slots, -1, dtype=int)
        for k, slots in enumerate(self.slots_by_target):
            for s in slots:
                out[s - 1] = k
        return out


def weighted_distances(traj_alice, traj_jack, cfg: ScenarioConfig) -> np.ndarray:
    """(K, N) selection weights; ``traj_jack=None`` drops the jammer legs."""
    wp_a = np.asarray(getattr(traj_alice, "waypoints", traj_alice), dtype=float)
    pos_a = wp_a[1:]
    targets = np.asarray(cfg.targets, dtype=float).reshape(-1, 2)
    tau = cfg.distance_weight
    d_ak = distance(pos_a[None, :, :], cfg.height["alice"], targets[:, None, :])
    d_ab = distance(pos_a, cfg.height["alice"], np.asarray(cfg.bob_pos))
    legs = d_ak
    if traj_jack is not None:
        wp_j = np.asarray(getattr(traj_jack, "waypoints", traj_jack), dtype=float)
        d_jk = distance(wp_j[1:][None, :, :], cfg.height["jack"],
                        targets[:, None, :])
        legs = d_ak + d_jk
    return tau * legs + (1.0 - tau) * d_ab[None, :]


def greedy_select(weighted: np.ndarray, slots_per_target: int) -> SensingAssignment:
    """Per target (in index order), take the cheapest remaining slots.

    Ties break toward the lower slot index; chosen slots leave the pool.
    """
    weighted = np.asarray(weighted, dtype=float)
    k, n = weighted.shape
    if slots_per_target < 0:
        raise ValueError("slots_per_target must be nonnegative")
    available = np.ones(n, dtype=bool)
    chosen = []
    for t in range(k):
        order = np.argsort(weighted[t], kind="stable")
        picks = [int(s) + 1 for s in order if available[s]][:slots_per_target]
        if len(picks) < slots_per_target:
            raise ValueError(
                f"target {t + 1}: {slots_per_target} slots required but only "
                f"{len(picks)} remain unassigned")
        for s in picks:
            available[s - 1] = False
        chosen.append(tuple(picks))
    return SensingAssignment(tuple(chosen), weighted.copy())


# ---------------------------------------------------------------------------
# beamforming with the sensing covariance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlotTarget:
    """Steering data for one slot's assigned sensing target."""

    slot: int  # 1-based
    target: int  # 1-based
    steer_alice: np.ndarray  # (M,) unit-modulus entries
    steer_jack: np.ndarray
    dist_alice: float
    dist_jack: float


def slot_target(ch, assignment: SensingAssignment, slot0: int,
                cfg: ScenarioConfig) -> SlotTarget:
    """Assemble SlotTarget for 0-based ``slot0`` from a channel set."""
    k = int(assignment.slot_to_target(cfg.n_slots)[slot0])
    if k < 0:
        raise ValueError(f"slot {slot0 + 1} has no assigned target")
    return SlotTarget(slot0 + 1, k + 1, ch.a_at[slot0, k], ch.a_jt[slot0, k],
                      float(ch.d_at[slot0, k]), float(ch.d_jt[slot0, k]))


@dataclass(frozen=True)
class SurrogateCoeffsSCS:
    """Linearization constants with the sensing covariance in both
    denominators."""

    a: float
    b: float
    c: float
    bob_interference_0: float
    eve_total_0: float

    def __post_init__(self):
        if not (self.b > 0 and self.c > 0):
            raise ValueError("linearization slopes must be positive")


def rate_scs(w_a, w_j, r_r, mats: SlotMatrices, cfg: ScenarioConfig) -> float:
    """Unclamped secrecy rate in a combined slot."""
    g_b = metrics.sinr_scs(w_a, r_r, w_j, mats.h_ab, mats.h_jb,
                           cfg.residual_sense_bob, cfg.residual_jam_bob,
                           cfg.noise_power["bob"])
    g_e = metrics.sinr_scs(w_a, r_r, w_j, mats.h_ae, mats.h_je,
                           cfg.residual_sense_eve, cfg.residual_jam_eve,
                           cfg.noise_power["eve"])
    return float(metrics.secrecy_rate(g_b, g_e, clamp=False))


def surrogate_coeffs_scs(w_a0, w_j0, r_r0, mats: SlotMatrices,
                         cfg: ScenarioConfig) -> SurrogateCoeffsSCS:
    eve_total = (metrics.trace_inner(mats.h_ae, w_a0)
                 + cfg.residual_sense_eve * metrics.trace_inner(mats.h_ae, r_r0)
                 + cfg.residual_jam_eve * metrics.trace_inner(mats.h_je, w_j0)
                 + cfg.noise_power["eve"])
    bob_intf = (cfg.residual_sense_bob * metrics.trace_inner(mats.h_ab, r_r0)
                + cfg.residual_jam_bob * metrics.trace_inner(mats.h_jb, w_j0)
                + cfg.noise_power["bob"])
    return SurrogateCoeffsSCS(
        a=float(np.log2(eve_total) + np.log2(bob_intf)),
        b=LOG2E / eve_total,
        c=LOG2E / bob_intf,
        bob_interference_0=float(bob_intf),
        eve_total_0=float(eve_total),
    )


def surrogate_rate_scs(w_a, w_j, r_r, coeffs: SurrogateCoeffsSCS,
                       w_a0, w_j0, r_r0, mats: SlotMatrices,
                       cfg: ScenarioConfig) -> float:
    """Concave lower bound on rate_scs, tight at the expansion point."""
    sig_b = (metrics.trace_inner(mats.h_ab, w_a)
             + cfg.residual_sense_bob * metrics.trace_inner(mats.h_ab, r_r)
             + cfg.residual_jam_bob * metrics.trace_inner(mats.h_jb, w_j)
             + cfg.noise_power["bob"])
    den_e = (cfg.residual_sense_eve * metrics.trace_inner(mats.h_ae, r_r)
             + cfg.residual_jam_eve * metrics.trace_inner(mats.h_je, w_j)
             + cfg.noise_power["eve"])
    d_eve = (metrics.trace_inner(mats.h_ae, w_a - w_a0)
             + cfg.residual_sense_eve * metrics.trace_inner(mats.h_ae, r_r - r_r0)
             + cfg.residual_jam_eve * metrics.trace_inner(mats.h_je, w_j - w_j0))
    d_bob = (cfg.residual_sense_bob * metrics.trace_inner(mats.h_ab, r_r - r_r0)
             + cfg.residual_jam_bob * metrics.trace_inner(mats.h_jb, w_j - w_j0))
    return float(np.log2(sig_b) + np.log2(den_e) - coeffs.a
                 - coeffs.b * d_eve - coeffs.c * d_bob)


def max_attainable_gain(sense: SlotTarget, cfg: ScenarioConfig) -> float:
    """Beampattern ceiling: full budgets aligned to the target steerings."""
    m = cfg.n_antennas
    return m * (cfg.p_max["alice"] / sense.dist_alice ** 2
                + cfg.p_max["jack"] / sense.dist_jack ** 2)


def scs_problem(w_a0, w_j0, r_r0, mats: SlotMatrices, sense: SlotTarget | None,
                cfg: ScenarioConfig, penalty=None) -> LogAffineSdpProblem:
    """Convexified slot problem over (W_a, R_r, W_j) with the gain floor."""
    coeffs = surrogate_coeffs_scs(w_a0, w_j0, r_r0, mats, cfg)
    m = cfg.n_antennas
    zero = np.zeros((m, m), dtype=complex)
    phi_rb, phi_re = cfg.residual_sense_bob, cfg.residual_sense_eve
    phi_jb, phi_je = cfg.residual_jam_bob, cfg.residual_jam_eve
    log_offsets = [cfg.noise_power["bob"], cfg.noise_power["eve"]]
    log_coeffs = [
        [mats.h_ab, phi_rb * mats.h_ab, phi_jb * mats.h_jb],
        [zero, phi_re * mats.h_ae, phi_je * mats.h_je],
    ]
    lin = [
        -coeffs.b * mats.h_ae,
        -(coeffs.b * phi_re * mats.h_ae + coeffs.c * phi_rb * mats.h_ab),
        -(coeffs.b * phi_je * mats.h_je + coeffs.c * phi_jb * mats.h_jb),
    ]
    if penalty is not None:
        weight_a, vec_a, weight_j, vec_j = penalty
        eye = np.eye(m, dtype=complex)
        lin[0] = lin[0] - weight_a * (eye - outer(vec_a))
        lin[2] = lin[2] - weight_j * (eye - outer(vec_j))
    movable_e = coeffs.eve_total_0 - cfg.noise_power["eve"]
    movable_b = coeffs.bob_interference_0 - cfg.noise_power["bob"]
    constant = -coeffs.a + coeffs.b * movable_e + coeffs.c * movable_b
    gain_coeffs = None
    gain_thresholds = None
    if sense is not None and cfg.beampattern_threshold > 0:
        g_a = outer(sense.steer_alice) / sense.dist_alice ** 2
        g_j = outer(sense.steer_jack) / sense.dist_jack ** 2
        gain_coeffs = [[g_a, g_a, g_j]]
        gain_thresholds = [cfg.beampattern_threshold]
    return LogAffineSdpProblem(
        dim=m,
        n_vars=3,
        trace_groups=(((0, 1), cfg.p_max["alice"]), ((2,), cfg.p_max["jack"])),
        log_offsets=log_offsets,
        log_coeffs=log_coeffs,
        linear_coeffs=lin,
        constant=constant,
        gain_coeffs=gain_coeffs,
        gain_thresholds=gain_thresholds,
        init=np.stack([np.asarray(w_a0), np.asarray(r_r0), np.asarray(w_j0)]),
    )


def _sensing_aligned(sense: SlotTarget, cfg: ScenarioConfig):
    """Full-power covariances pointed straight at the target."""
    m = cfg.n_antennas
    r_r = cfg.p_max["alice"] * outer(sense.steer_alice) / m
    w_j = cfg.p_max["jack"] * outer(sense.steer_jack) / m
    return r_r.astype(complex), w_j.astype(complex)


def slot_gain(w_a, r_r, w_j, sense: SlotTarget) -> float:
    return float(metrics.beampattern_gain(w_a, r_r, w_j, sense.steer_alice,
                                          sense.steer_jack, sense.dist_alice,
                                          sense.dist_jack))


def _blend_to_gain(w_a, w_j, r_r, sense, cfg, floor):
    """Blend the incumbent toward the target-aligned point until the slot
    gain reaches ``floor``; the blend keeps traces within budget."""
    g0 = slot_gain(w_a, r_r, w_j, sense)
    if g0 >= floor:
        return w_a, w_j, r_r
    cap = max_attainable_gain(sense, cfg)
    r_full, j_full = _sensing_aligned(sense, cfg)
    s = (floor - g0) / max(cap - g0, 1e-300)
    s = min(1.0, 1.02 * s)
    w_a = (1.0 - s) * w_a
    r_r = (1.0 - s) * r_r + s * r_full
    w_j = (1.0 - s) * w_j + s * j_full
    return w_a, w_j, r_r


def _feasible_init(w_a, w_j, r_r, sense, cfg):
    """Cheapest start satisfying the configured gain floor."""
    return _blend_to_gain(w_a, w_j, r_r, sense, cfg, cfg.beampattern_threshold)


def _exploration_init(w_a, w_j, r_r, sense, cfg):
    """Second start tilted halfway toward the sensing-aligned point.

    The SCA descent is local: starting from the communication incumbent and
    from a strongly sensing-tilted blend can converge to different fixed
    points. Racing both keeps the attained rate from dipping when the gain
    floor is loosened — the loose-floor feasible set contains every
    tight-floor solution, so a loose-floor run should never finish lower.
    """
    cap = max_attainable_gain(sense, cfg)
    target = max(cfg.beampattern_threshold, 0.5 * cap)
    return _blend_to_gain(w_a, w_j, r_r, sense, cfg, target)


@dataclass
class ScsSolveInfo:
    sca_iterations: int
    penalty_rounds: int
    rate: float
    gain: float
    rank_ratio_alice: float
    rank_ratio_jack: float
    rank_one_ok: bool
    solver_status: str


def _sca_loop_scs(w_a, w_j, r_r, mats, sense, cfg, penalty, tol, max_rounds,
                  backend):
    algo = cfg.algo
    gain_tol = max(1e-9, 1e-3 * algo.solver_tol)
    status = "success"
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        prob = scs_problem(w_a, w_j, r_r, mats, sense, cfg, penalty=penalty)
        expansion = np.stack([w_a, r_r, w_j])
        base = objective_value(prob, expansion)
        x, rep = solve_log_affine_sdp(prob, tol=algo.solver_tol,
                                      backend=backend)
        status = rep.status
        feas = rep.constraint_violation <= gain_tol
        if not feas or rep.objective < base:
            break  # keep the incumbent; candidate worse or infeasible
        w_a, r_r, w_j = x[0], x[1], x[2]
        if rep.objective - base <= tol:
            break
    return w_a, w_j, r_r, rounds, status


def _solve_chain(w_a, w_j, r_r, mats, sense, cfg, backend):
    """Penalty-escalated SCA descent from one floor-feasible start.

    Returns the final covariances plus (rate, gain, sca_rounds,
    penalty_rounds, status); never finishes below the start.
    """
    algo = cfg.algo
    gamma = cfg.beampattern_threshold
    rate_init = rate_scs(w_a, w_j, r_r, mats, cfg)
    keep = (w_a.copy(), w_j.copy(), r_r.copy())

    total_rounds = 0
    penalty = None
    weight_a = 1.0 / max(algo.penalty_init * cfg.p_max["alice"], 1e-300)
    weight_j = 1.0 / max(algo.penalty_init * max(cfg.p_max["jack"], 1e-12), 1e-300)
    status = "success"
    penalty_rounds = 0
    for penalty_rounds in range(algo.max_penalty_rounds + 1):
        w_a, w_j, r_r, rounds, status = _sca_loop_scs(
            w_a, w_j, r_r, mats, sense, cfg, penalty, algo.bf_tol,
            algo.max_inner_iters, backend)
        total_rounds += rounds
        ra, rj = rank_ratio(w_a), rank_ratio(w_j)
        if min(ra, rj) >= algo.rank_one_ratio_min:
            break
        vec_a = np.linalg.eigh(0.5 * (w_a + w_a.conj().T))[1][:, -1]
        vec_j = np.linalg.eigh(0.5 * (w_j + w_j.conj().T))[1][:, -1]
        penalty = (weight_a, vec_a, weight_j, vec_j)
        weight_a /= algo.penalty_shrink
        weight_j /= algo.penalty_shrink

    gain_tol = max(1e-9, 1e-3 * algo.solver_tol)
    rate_out = rate_scs(w_a, w_j, r_r, mats, cfg)
    gain_out = slot_gain(w_a, r_r, w_j, sense)
    if rate_out < rate_init or gain_out < gamma - gain_tol:
        w_a, w_j, r_r = keep  # never regress below the feasible start
        rate_out = rate_init
        gain_out = slot_gain(w_a, r_r, w_j, sense)
    return w_a, w_j, r_r, rate_out, gain_out, total_rounds, penalty_rounds, status


def solve_scs_beamforming(mats: SlotMatrices, sense: SlotTarget,
                          cfg: ScenarioConfig, init=None,
                          backend: str | None = None):
    """One combined slot: maximize the surrogate rate subject to powers and
    the target's beampattern floor. Returns (W_a, W_j, R_r, ScsSolveInfo).

    Two descents race when their starts differ — one from the incumbent
    blended just enough to satisfy the floor, one from the exploration
    blend — and the better rank-one-recoverable rate wins.

    Raises SensingInfeasibleError when the floor exceeds the attainable
    ceiling at full power.
    """
    algo = cfg.algo
    m = cfg.n_antennas
    gamma = cfg.beampattern_threshold
    cap = max_attainable_gain(sense, cfg)
    if gamma > cap * (1.0 + 1e-9):
        raise SensingInfeasibleError(sense.slot, sense.target, gamma, cap)

    if init is None:
        from .beamforming import mrt_half_power_init
        w_a, w_j = mrt_half_power_init(mats, cfg)
        r_r = np.zeros((m, m), dtype=complex)
    else:
        w_a = metrics.check_hermitian(np.asarray(init[0], dtype=complex), "init source")
        w_j = metrics.check_hermitian(np.asarray(init[1], dtype=complex), "init jammer")
        r_r = (np.zeros((m, m), dtype=complex) if len(init) < 3 or init[2] is None
               else metrics.check_hermitian(np.asarray(init[2], dtype=complex),
                                            "init sensing"))
    starts = [_feasible_init(w_a, w_j, r_r, sense, cfg)]
    explore = _exploration_init(w_a, w_j, r_r, sense, cfg)
    if any(not np.allclose(a, b) for a, b in zip(explore, starts[0])):
        starts.append(explore)

    chains = [_solve_chain(sa, sj, sr, mats, sense, cfg, backend)
              for sa, sj, sr in starts]

    def chain_key(chain):
        ratio = min(rank_ratio(chain[0]), rank_ratio(chain[1]))
        return (ratio >= algo.rank_one_ratio_min, chain[3])

    w_a, w_j, r_r, rate_out, gain_out, _, _, status = max(chains, key=chain_key)
    ra, rj = rank_ratio(w_a), rank_ratio(w_j)
    info = ScsSolveInfo(
        sca_iterations=sum(c[5] for c in chains),
        penalty_rounds=sum(c[6] for c in chains),
        rate=rate_out,
        gain=gain_out,
        rank_ratio_alice=ra,
        rank_ratio_jack=rj,
        rank_one_ok=min(ra, rj) >= algo.rank_one_ratio_min,
        solver_status=status,
    )
    return w_a, w_j, r_r, info


# ---------------------------------------------------------------------------
# planner entry point
# ---------------------------------------------------------------------------


def plan_scs(cfg: ScenarioConfig, sol: SolutionPlan,
             backend: str | None = None) -> SolutionPlan:
    """Label the selected slots, re-solve their beamformers with the gain
    floor, and re-evaluate. The trajectories are left untouched."""
    if cfg.n_sensing_slots == 0:
        return sol
    n = cfg.n_slots
    weighted = weighted_distances(sol.traj_alice, sol.traj_jack, cfg)
    assignment = greedy_select(weighted, cfg.slots_per_target)
    slot2target = assignment.slot_to_target(n)
    labels = [metrics.SCS if slot2target[s] >= 0 else metrics.SC
              for s in range(n)]

    ch = build_channel_set(cfg, sol.traj_alice, sol.traj_jack)
    w_a = sol.plan.w_a.copy()
    w_j = sol.plan.w_j.copy()
    r_r = sol.plan.r_r.copy()
    infos = []
    for s in np.flatnonzero(slot2target >= 0):
        sense = slot_target(ch, assignment, int(s), cfg)
        w_a[s], w_j[s], r_r[s], info = solve_scs_beamforming(
            slot_matrices(ch, int(s)), sense, cfg,
            init=(w_a[s], w_j[s], r_r[s]), backend=backend)
        infos.append(info)

    report = metrics.evaluate(cfg, sol.traj_alice, sol.traj_jack, w_a, w_j,
                              r_r, labels, slot2target)
    extras = dict(sol.extras)
    extras["scs"] = {
        "selected_slots": list(assignment.selected_slots),
        "sca_iterations_total": int(sum(i.sca_iterations for i in infos)),
        "penalty_rounds_total": int(sum(i.penalty_rounds for i in infos)),
        "rank_flag_count": int(sum(0 if i.rank_one_ok else 1 for i in infos)),
        "min_gain": float(min(i.gain for i in infos)) if infos else None,
    }
    from .beamforming import BeamformingPlan
    return SolutionPlan(
        config=cfg,
        traj_alice=sol.traj_alice,
        traj_jack=sol.traj_jack,
        plan=BeamformingPlan.from_matrices(w_a, w_j, r_r),
        slot_labels=labels,
        assignment=slot2target,
        sensing=assignment,
        asr_history=list(sol.asr_history),
        report=report,
        extras=extras,
    )
