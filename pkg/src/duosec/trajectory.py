"""Single-UAV waypoint optimization against fixed per-slot beamformers.

The slot secrecy rate is rewritten in distance-normalized terms whose value
and gradient with respect to the moving UAV's position are closed form; a
per-slot linear model is ascended inside a shrinking trust region, and steps
are accepted only when the true rewritten rate improves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from .scenario import ScenarioConfig
from .solvers import ChainSocpProblem, solve_chain_socp

LOG2E = metrics.LOG2E

# Iteration cap for one waypoint-chain solve. In the coupled regime (trust
# balls comparable to the edge limit) the projected-gradient chain solver
# drifts slowly instead of reaching stationarity; capped solves are still
# feasible monotone ascents, and the true-rate accept guard keeps the outer
# loop sound. Raising the cap past ~300 buys no measurable rate.
_CHAIN_MAX_ITERS = 300


@dataclass(frozen=True)
class Trajectory:
    """Waypoint track of one UAV; row 0 is the starting location."""

    waypoints: np.ndarray  # (N+1, 2) meters
    altitude: float

    def __post_init__(self):
        wp = np.ascontiguousarray(np.asarray(self.waypoints, dtype=float))
        if wp.ndim != 2 or wp.shape[1] != 2 or wp.shape[0] < 2:
            raise ValueError("waypoints must have shape (N+1, 2)")
        if not np.all(np.isfinite(wp)):
            raise ValueError("waypoints must be finite")
        object.__setattr__(self, "waypoints", wp)
        if not self.altitude > 0:
            raise ValueError("altitude must be positive")

    @property
    def n_slots(self) -> int:
        return self.waypoints.shape[0] - 1

    def steps(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)


def validate_trajectory(traj: Trajectory, cfg: ScenarioConfig, uav: str,
                        tol: float = 1e-6) -> None:
    if traj.n_slots != cfg.n_slots:
        raise ValueError(f"{uav}: expected {cfg.n_slots} slots, got {traj.n_slots}")
    if abs(traj.altitude - cfg.height[uav]) > tol:
        raise ValueError(f"{uav}: altitude mismatch")
    for label, want, got in (("initial", cfg.uav_initial[uav], traj.waypoints[0]),
                             ("final", cfg.uav_final[uav], traj.waypoints[-1])):
        if np.linalg.norm(np.asarray(want) - got) > tol:
            raise ValueError(f"{uav}: {label} waypoint {got} != {want}")
    worst = float(traj.steps().max(initial=0.0))
    if worst > cfg.slot_displacement + tol:
        raise ValueError(
            f"{uav}: slot displacement {worst:.6f} exceeds {cfg.slot_displacement}")


# ---------------------------------------------------------------------------
# distance-form rate: value and gradient in the moving UAV's position
# ---------------------------------------------------------------------------


def _pair_terms(w_mat: np.ndarray):
    """Decompose a Hermitian matrix for steering quadratic forms.

    a(d)^H W a(d) = diag_sum + sum amps*cos(phases + kappa*gaps/d) where the
    steering phase increment is kappa/d per antenna.
    """
    w_mat = np.asarray(w_mat, dtype=complex)
    m = w_mat.shape[0]
    iu, ju = np.triu_indices(m, 1)
    off = w_mat[iu, ju]
    return (float(np.trace(w_mat).real), 2.0 * np.abs(off), np.angle(off),
            (ju - iu).astype(float))


def _steer_quad(pairs, kappa: float, d: float) -> float:
    diag_sum, amps, phases, gaps = pairs
    if amps.size == 0:
        return diag_sum
    return diag_sum + float(np.sum(amps * np.cos(phases + kappa * gaps / d)))


def _steer_quad_dgrad(pairs, kappa: float, d: float) -> float:
    """Scalar s with d(quad)/du = s * (u - v), via d(d)/du = (u-v)/d."""
    _, amps, phases, gaps = pairs
    if amps.size == 0:
        return 0.0
    return float(np.sum(amps * np.sin(phases + kappa * gaps / d) * kappa * gaps)) / d ** 3


def _kappa(cfg: ScenarioConfig, uav: str) -> float:
    return 2.0 * np.pi * cfg.antenna_spacing * cfg.height[uav]


@dataclass(frozen=True)
class _SlotFixed:
    """Everything constant while one UAV's slot position varies."""

    which: str
    kappa: float
    height: float
    pairs: tuple  # moving UAV's covariance decomposition
    v_b: np.ndarray
    v_e: np.ndarray
    # source case: interference-plus-noise over pathloss_ref at each receiver
    # jammer case: fixed source power terms and noise/pathloss slopes
    coef_b: float
    coef_e: float
    aux_b: float
    aux_e: float


def _prepare_slot(which: str, w_a: np.ndarray, w_j: np.ndarray,
                  other_xy: np.ndarray, cfg: ScenarioConfig) -> _SlotFixed:
    beta = cfg.pathloss_ref
    v_b = np.asarray(cfg.bob_pos, dtype=float)
    v_e = np.asarray(cfg.eve_pos, dtype=float)
    other_xy = np.asarray(other_xy, dtype=float)
    if which == "alice":
        h_j = cfg.height["jack"]
        pairs_j = _pair_terms(w_j)
        kap_j = _kappa(cfg, "jack")
        coefs = []
        for v, res, noise in ((v_b, cfg.residual_jam_bob, cfg.noise_power["bob"]),
                              (v_e, cfg.residual_jam_eve, cfg.noise_power["eve"])):
            d_j = float(np.hypot(*(other_xy - v)) ** 2 + h_j ** 2) ** 0.5
            quad = _steer_quad(pairs_j, kap_j, d_j)
            coefs.append(res * quad / d_j ** 2 + noise / beta)
        return _SlotFixed("alice", _kappa(cfg, "alice"), cfg.height["alice"],
                          _pair_terms(w_a), v_b, v_e, coefs[0], coefs[1], 0.0, 0.0)
    if which == "jack":
        h_a = cfg.height["alice"]
        pairs_a = _pair_terms(w_a)
        kap_a = _kappa(cfg, "alice")
        sig = []
        for v in (v_b, v_e):
            d_a = float(np.hypot(*(other_xy - v)) ** 2 + h_a ** 2) ** 0.5
            sig.append(_steer_quad(pairs_a, kap_a, d_a) / d_a ** 2)
        return _SlotFixed("jack", _kappa(cfg, "jack"), cfg.height["jack"],
                          _pair_terms(w_j), v_b, v_e, sig[0], sig[1],
                          cfg.noise_power["bob"] / beta, cfg.noise_power["eve"] / beta)
    raise ValueError(f"unknown uav {which!r}")


def _slot_value_grad(u: np.ndarray, sf: _SlotFixed, cfg: ScenarioConfig,
                     want_grad: bool):
    u = np.asarray(u, dtype=float)
    val = 0.0
    grad = np.zeros(2)
    if sf.which == "alice":
        items = ((sf.v_b, sf.coef_b, 1.0), (sf.v_e, sf.coef_e, -1.0))
        for v, coef, sign in items:
            diff = u - v
            d = float(np.sqrt(diff @ diff + sf.height ** 2))
            quad = _steer_quad(sf.pairs, sf.kappa, d)
            z2 = coef * d ** 2  # interference-plus-noise, distance form
            z1 = quad + z2  # plus received signal
            val += sign * (np.log2(z1) - np.log2(z2))
            if want_grad:
                gs = _steer_quad_dgrad(sf.pairs, sf.kappa, d)
                grad += sign * LOG2E * (gs / z1 + 2.0 * coef * (1.0 / z1 - 1.0 / z2)) * diff
    else:
        items = ((sf.v_b, sf.coef_b, cfg.residual_jam_bob, sf.aux_b, 1.0),
                 (sf.v_e, sf.coef_e, cfg.residual_jam_eve, sf.aux_e, -1.0))
        for v, sig, res, nob, sign in items:
            diff = u - v
            d2 = float(diff @ diff + sf.height ** 2)
            d = np.sqrt(d2)
            quad = _steer_quad(sf.pairs, sf.kappa, d)
            z4 = res * quad + nob * d2  # jamming-plus-noise, distance form
            z3 = sig * d2 + z4  # plus received signal
            val += sign * (np.log2(z3) - np.log2(z4))
            if want_grad:
                gs = _steer_quad_dgrad(sf.pairs, sf.kappa, d)
                dz4 = (res * gs + 2.0 * nob) * diff
                dz3 = 2.0 * sig * diff + dz4
                grad += sign * LOG2E * (dz3 / z3 - dz4 / z4)
    return float(val), grad


def rewritten_rate(u, which: str, other_xy, w_a, w_j, cfg: ScenarioConfig) -> float:
    """Unclamped slot secrecy rate as a function of one UAV's position.

    Algebraically identical to rebuilding the channels at ``u`` and running
    the metrics pipeline; that equivalence is the module's main self-test.
    """
    sf = _prepare_slot(which, np.asarray(w_a, dtype=complex),
                       np.asarray(w_j, dtype=complex), other_xy, cfg)
    return _slot_value_grad(np.asarray(u, dtype=float), sf, cfg, False)[0]


@dataclass(frozen=True)
class TrajectorySurrogate:
    """Per-slot linear models of the rewritten rate around an expansion."""

    which: str
    expansion: np.ndarray  # (N+1, 2)
    alpha: np.ndarray  # (N,) slot rates at the expansion, bits
    rho: np.ndarray  # (N+1, 2) gradient at waypoint n (row 0 unused)
    trust_radius: float

    def phase_asr(self, waypoints: np.ndarray) -> float:
        """Mean of the per-slot linear models at ``waypoints``."""
        delta = np.asarray(waypoints, dtype=float)[1:] - self.expansion[1:]
        return float(np.mean(self.alpha + np.sum(self.rho[1:] * delta, axis=1)))


def fot_gradient(which: str, traj: Trajectory, other: Trajectory,
                 w_a_slots, w_j_slots, cfg: ScenarioConfig,
                 trust_radius: float = 0.0, verify: bool = True,
                 fd_step: float = 1e-3, fd_rtol: float = 1e-4,
                 fd_atol: float = 1e-8) -> TrajectorySurrogate:
    """Closed-form per-slot gradients, cross-checked against central
    finite differences of the rewritten rate (``verify``)."""
    n = traj.n_slots
    w_a_slots = np.asarray(w_a_slots, dtype=complex)
    w_j_slots = np.asarray(w_j_slots, dtype=complex)
    alpha = np.zeros(n)
    rho = np.zeros((n + 1, 2))
    for slot in range(1, n + 1):
        u = traj.waypoints[slot]
        sf = _prepare_slot(which, w_a_slots[slot - 1], w_j_slots[slot - 1],
                           other.waypoints[slot], cfg)
        val, grad = _slot_value_grad(u, sf, cfg, True)
        alpha[slot - 1] = val
        rho[slot] = grad
        if verify:
            fd = np.zeros(2)
            for axis in range(2):
                shift = np.zeros(2)
                shift[axis] = fd_step
                hi, _ = _slot_value_grad(u + shift, sf, cfg, False)
                lo, _ = _slot_value_grad(u - shift, sf, cfg, False)
                fd[axis] = (hi - lo) / (2.0 * fd_step)
            err = float(np.linalg.norm(fd - grad))
            if err > max(fd_rtol * np.linalg.norm(fd), fd_atol):
                raise ValueError(
                    f"{which} slot {slot}: analytic gradient {grad} deviates "
                    f"from finite differences {fd} (|err|={err:.3e})")
    return TrajectorySurrogate(which, traj.waypoints.copy(), alpha, rho,
                               float(trust_radius))


def phase_rates(which: str, waypoints: np.ndarray, other: Trajectory,
                w_a_slots, w_j_slots, cfg: ScenarioConfig):
    """(unclamped mean, clamped mean) of slot rates along ``waypoints``."""
    n = waypoints.shape[0] - 1
    vals = np.zeros(n)
    for slot in range(1, n + 1):
        sf = _prepare_slot(which, w_a_slots[slot - 1], w_j_slots[slot - 1],
                           other.waypoints[slot], cfg)
        vals[slot - 1] = _slot_value_grad(waypoints[slot], sf, cfg, False)[0]
    return float(vals.mean()), float(np.clip(vals, 0.0, None).mean())


def _repair_edges(incumbent: np.ndarray, cand: np.ndarray,
                  limit: float) -> np.ndarray:
    """Blend a candidate toward a feasible chain until every step fits.

    Solver output may overshoot the edge limit by its tolerance; the blend
    keeps the fixed endpoints, and each edge norm is convex in the blend
    factor, so bisection from the feasible incumbent is exact.
    """
    def worst(wp):
        return float(np.linalg.norm(np.diff(wp, axis=0), axis=1)
                     .max(initial=0.0))

    if worst(cand) <= limit:
        return cand
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if worst(incumbent + mid * (cand - incumbent)) <= limit:
            lo = mid
        else:
            hi = mid
    return incumbent + lo * (cand - incumbent)


def optimize_trajectory(which: str, traj: Trajectory, other: Trajectory,
                        w_a_slots, w_j_slots, cfg: ScenarioConfig,
                        backend: str | None = None,
                        verify_gradients: bool = True):
    """Trust-region ascent of the phase rate over one UAV's waypoints.

    Returns (Trajectory, log dict). The radius shrinks geometrically every
    round; a candidate is kept only if the unclamped mean rate improves and
    the clamped mean does not fall.
    """
    algo = cfg.algo
    shrink = (algo.trust_shrink_alice if which == "alice"
              else algo.trust_shrink_jack)
    tol = algo.traj_tol_alice if which == "alice" else algo.traj_tol_jack
    psi = algo.trust_radius_init * cfg.slot_displacement
    start = np.asarray(cfg.uav_initial[which], dtype=float)
    end = np.asarray(cfg.uav_final[which], dtype=float)

    current = traj.waypoints.copy()
    mean_u, mean_c = phase_rates(which, current, other, w_a_slots, w_j_slots, cfg)
    history = [mean_c]
    accepted = 0
    rounds = 0
    while psi >= 1e-3:
        rounds += 1
        surr = fot_gradient(which, Trajectory(current, traj.altitude), other,
                            w_a_slots, w_j_slots, cfg, trust_radius=psi,
                            verify=verify_gradients and rounds == 1)
        if float(np.abs(surr.rho).max(initial=0.0)) < 1e-15:
            break  # flat objective; nothing to move
        prob = ChainSocpProblem(
            objective=surr.rho,
            start=start,
            end=end,
            edge_limit=cfg.slot_displacement,
            trust_centers=current,
            trust_radii=psi,
            init=current,
        )
        cand, rep = solve_chain_socp(prob, tol=algo.solver_tol,
                                     max_iters=_CHAIN_MAX_ITERS,
                                     backend=backend)
        gain = -np.inf
        if rep.status in ("success", "max_iters"):
            cand = _repair_edges(current, cand, cfg.slot_displacement)
            cand_u, cand_c = phase_rates(which, cand, other, w_a_slots,
                                         w_j_slots, cfg)
            gain = cand_u - mean_u
            if gain > 0 and cand_c >= mean_c - 1e-12:
                current = cand
                mean_u, mean_c = cand_u, cand_c
                accepted += 1
                history.append(mean_c)
                psi *= shrink
                if gain <= tol:
                    break
                continue
            if abs(gain) <= tol:
                break  # best step inside the ball is a no-op: converged
        psi *= shrink
    out = Trajectory(current, traj.altitude)
    log = {
        "rounds": rounds,
        "accepted_steps": accepted,
        "final_radius": psi,
        "phase_asr_history": history,
        "phase_asr_unclamped": mean_u,
        "phase_asr": mean_c,
    }
    return out, log
