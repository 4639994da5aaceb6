"""Per-slot transmit covariance design for the communication-only phase.

Lifts the beamformers to PSD covariances, maximizes a concave lower bound on
the per-slot secrecy rate around an expansion point, and iterates the bound
(sequential convex approximation). A linear spectral penalty drives the
covariances back to rank one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from .geometry import ChannelSet, outer
from .scenario import ScenarioConfig
from .solvers import LogAffineSdpProblem, solve_log_affine_sdp

LOG2E = metrics.LOG2E


@dataclass(frozen=True)
class SlotMatrices:
    """Channel outer products h h^H for one slot (Hermitian PSD, rank one)."""

    h_ab: np.ndarray
    h_ae: np.ndarray
    h_jb: np.ndarray
    h_je: np.ndarray


def slot_matrices(ch: ChannelSet, slot: int) -> SlotMatrices:
    return SlotMatrices(
        h_ab=ch.slot_outer("h_ab", slot),
        h_ae=ch.slot_outer("h_ae", slot),
        h_jb=ch.slot_outer("h_jb", slot),
        h_je=ch.slot_outer("h_je", slot),
    )


@dataclass(frozen=True)
class SurrogateCoeffsSC:
    """Expansion-point constants of the concave secrecy-rate lower bound.

    ``b`` is the rate slope per watt of Eve's total received power, ``c``
    the slope per watt of Bob's interference-plus-noise power, and ``a``
    collects the expansion constants so the bound is tight at the expansion.
    """

    a: float
    b: float
    c: float
    bob_interference_0: float  # x2 at the expansion point, watts
    eve_total_0: float  # x3 at the expansion point, watts

    def __post_init__(self):
        if not (self.b > 0 and self.c > 0):
            raise ValueError("surrogate slopes must be positive")


def rate_sc(w_a, w_j, mats: SlotMatrices, cfg: ScenarioConfig) -> float:
    """Unclamped secrecy rate of one communication-only slot."""
    g_b = metrics.sinr_sc(w_a, w_j, mats.h_ab, mats.h_jb,
                          cfg.residual_jam_bob, cfg.noise_power["bob"])
    g_e = metrics.sinr_sc(w_a, w_j, mats.h_ae, mats.h_je,
                          cfg.residual_jam_eve, cfg.noise_power["eve"])
    return float(metrics.secrecy_rate(g_b, g_e, clamp=False))


def surrogate_coeffs_sc(w_a0, w_j0, mats: SlotMatrices,
                        cfg: ScenarioConfig) -> SurrogateCoeffsSC:
    sig_b = cfg.noise_power["bob"]
    sig_e = cfg.noise_power["eve"]
    x2 = cfg.residual_jam_bob * metrics.trace_inner(mats.h_jb, w_j0) + sig_b
    x3 = (metrics.trace_inner(mats.h_ae, w_a0)
          + cfg.residual_jam_eve * metrics.trace_inner(mats.h_je, w_j0) + sig_e)
    return SurrogateCoeffsSC(
        a=float(np.log2(x3) + np.log2(x2)),
        b=float(LOG2E / x3),
        c=float(LOG2E / x2),
        bob_interference_0=float(x2),
        eve_total_0=float(x3),
    )


def surrogate_rate_sc(w_a, w_j, coeffs: SurrogateCoeffsSC, w_a0, w_j0,
                      mats: SlotMatrices, cfg: ScenarioConfig) -> float:
    """Concave lower bound on the slot secrecy rate, tight at (w_a0, w_j0)."""
    sig_b = cfg.noise_power["bob"]
    sig_e = cfg.noise_power["eve"]
    x1 = (metrics.trace_inner(mats.h_ab, w_a)
          + cfg.residual_jam_bob * metrics.trace_inner(mats.h_jb, w_j) + sig_b)
    x4 = cfg.residual_jam_eve * metrics.trace_inner(mats.h_je, w_j) + sig_e
    val = np.log2(x1) + np.log2(x4) - coeffs.a
    val -= coeffs.b * metrics.trace_inner(mats.h_ae, w_a - w_a0)
    cross = (coeffs.b * cfg.residual_jam_eve * mats.h_je
             + coeffs.c * cfg.residual_jam_bob * mats.h_jb)
    val -= metrics.trace_inner(cross, w_j - w_j0)
    return float(val)


def sc_problem(w_a0, w_j0, mats: SlotMatrices, cfg: ScenarioConfig,
               penalty=None) -> LogAffineSdpProblem:
    """Assemble the per-slot concave maximization in solver form.

    Variables: index 0 = source covariance, index 1 = jamming covariance.
    ``penalty``: optional (weight_a, vec_a, weight_j, vec_j) spectral terms.
    """
    m = cfg.n_antennas
    coeffs = surrogate_coeffs_sc(w_a0, w_j0, mats, cfg)
    zeros = np.zeros((m, m), dtype=complex)
    log_offsets = np.array([cfg.noise_power["bob"], cfg.noise_power["eve"]])
    log_coeffs = np.array([
        [mats.h_ab, cfg.residual_jam_bob * mats.h_jb],
        [zeros, cfg.residual_jam_eve * mats.h_je],
    ])
    cross = (coeffs.b * cfg.residual_jam_eve * mats.h_je
             + coeffs.c * cfg.residual_jam_bob * mats.h_jb)
    lin_a = -coeffs.b * mats.h_ae
    lin_j = -cross
    constant = (-coeffs.a
                + coeffs.b * metrics.trace_inner(mats.h_ae, w_a0)
                + metrics.trace_inner(cross, w_j0))
    if penalty is not None:
        wt_a, vec_a, wt_j, vec_j = penalty
        eye = np.eye(m, dtype=complex)
        lin_a = lin_a - wt_a * (eye - outer(vec_a))
        lin_j = lin_j - wt_j * (eye - outer(vec_j))
    return LogAffineSdpProblem(
        dim=m,
        n_vars=2,
        trace_groups=(((0,), cfg.p_max["alice"]), ((1,), cfg.p_max["jack"])),
        log_offsets=log_offsets,
        log_coeffs=log_coeffs,
        linear_coeffs=np.array([lin_a, lin_j]),
        constant=float(constant),
        init=np.array([w_a0, w_j0]),
    )


def rank_ratio(w_mat: np.ndarray) -> float:
    """Largest eigenvalue over trace; 1.0 for a (near-)zero matrix."""
    tr = float(np.trace(w_mat).real)
    if tr <= 1e-300:
        return 1.0
    lam = float(np.linalg.eigvalsh(0.5 * (w_mat + w_mat.conj().T))[-1])
    return lam / tr


def extract_rank_one(w_mat: np.ndarray, ratio_min: float = 0.999):
    """Principal-component beam vector; flags matrices far from rank one."""
    sym = 0.5 * (w_mat + w_mat.conj().T)
    evals, evecs = np.linalg.eigh(sym)
    lam = max(float(evals[-1]), 0.0)
    vec = np.sqrt(lam) * evecs[:, -1]
    return vec, rank_ratio(w_mat) >= ratio_min


@dataclass
class BeamformingPlan:
    """Per-slot transmit covariances with their rank-one extractions."""

    w_a: np.ndarray  # (N, M, M) source covariance
    w_j: np.ndarray  # jamming covariance
    r_r: np.ndarray  # dedicated sensing covariance, zero in plain slots
    vec_a: np.ndarray  # (N, M) principal beams
    vec_j: np.ndarray
    rank_ratio_a: np.ndarray  # (N,)
    rank_ratio_j: np.ndarray

    @classmethod
    def from_matrices(cls, w_a, w_j, r_r=None) -> "BeamformingPlan":
        w_a = np.asarray(w_a, dtype=complex)
        w_j = np.asarray(w_j, dtype=complex)
        r_r = (np.zeros_like(w_a) if r_r is None
               else np.asarray(r_r, dtype=complex))
        if w_a.shape != w_j.shape or r_r.shape != w_a.shape or w_a.ndim != 3:
            raise ValueError("per-slot covariance stacks must share (N, M, M)")
        n, m = w_a.shape[:2]
        vec_a = np.zeros((n, m), dtype=complex)
        vec_j = np.zeros((n, m), dtype=complex)
        ratio_a = np.ones(n)
        ratio_j = np.ones(n)
        for s in range(n):
            vec_a[s], _ = extract_rank_one(w_a[s])
            vec_j[s], _ = extract_rank_one(w_j[s])
            ratio_a[s] = rank_ratio(w_a[s])
            ratio_j[s] = rank_ratio(w_j[s])
        return cls(w_a, w_j, r_r, vec_a, vec_j, ratio_a, ratio_j)

    def power_residuals(self, cfg: ScenarioConfig):
        """(alice, jack) per-slot trace minus budget; positive = violation."""
        tr_a = np.einsum("nii->n", self.w_a).real + np.einsum("nii->n", self.r_r).real
        tr_j = np.einsum("nii->n", self.w_j).real
        return tr_a - cfg.p_max["alice"], tr_j - cfg.p_max["jack"]


def mrt_half_power_init(mats: SlotMatrices, cfg: ScenarioConfig):
    """Default expansion point: half-power beams, source toward the
    legitimate user and jammer toward the eavesdropper."""
    h_ab = np.linalg.eigh(mats.h_ab)[1][:, -1]
    h_je = np.linalg.eigh(mats.h_je)[1][:, -1]
    w_a0 = 0.5 * cfg.p_max["alice"] * outer(h_ab)
    w_j0 = 0.5 * cfg.p_max["jack"] * outer(h_je)
    return w_a0, w_j0


@dataclass
class BeamSolveInfo:
    sca_iterations: int
    penalty_rounds: int
    rate: float
    surrogate: float
    rank_ratio_alice: float
    rank_ratio_jack: float
    rank_one_ok: bool
    solver_status: str


def _sca_loop(w_a, w_j, mats, cfg, penalty, tol, max_rounds, backend):
    """Iterate the tangent bound to a fixed point; returns improved pair."""
    from .solvers import objective_value

    algo = cfg.algo
    status = "success"
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        prob = sc_problem(w_a, w_j, mats, cfg, penalty=penalty)
        base = objective_value(prob, np.array([w_a, w_j]))
        x, rep = solve_log_affine_sdp(prob, tol=algo.solver_tol,
                                      max_iters=50000, backend=backend)
        status = rep.status
        if rep.objective >= base:  # solver warm-starts at the expansion point
            w_a, w_j = x[0], x[1]
        if rep.objective - base <= tol:
            break
    return w_a, w_j, rounds, status


def solve_sc_beamforming(mats: SlotMatrices, cfg: ScenarioConfig, init=None,
                         backend: str | None = None):
    """SDR + SCA + rank-one penalty for one communication-only slot.

    Returns (w_a, w_j, BeamSolveInfo); the achieved unclamped rate never
    falls below the rate at ``init``.
    """
    algo = cfg.algo
    if init is None:
        w_a, w_j = mrt_half_power_init(mats, cfg)
    else:
        w_a = metrics.check_hermitian(np.asarray(init[0], dtype=complex), "init source")
        w_j = metrics.check_hermitian(np.asarray(init[1], dtype=complex), "init jammer")
    rate_init = rate_sc(w_a, w_j, mats, cfg)

    total_rounds = 0
    penalty = None
    weight_a = 1.0 / max(algo.penalty_init * cfg.p_max["alice"], 1e-300)
    weight_j = 1.0 / max(algo.penalty_init * max(cfg.p_max["jack"], 1e-12), 1e-300)
    status = "success"
    penalty_rounds = 0
    for penalty_rounds in range(algo.max_penalty_rounds + 1):
        w_a, w_j, rounds, status = _sca_loop(
            w_a, w_j, mats, cfg, penalty, algo.bf_tol,
            algo.max_inner_iters, backend)
        total_rounds += rounds
        ra, rj = rank_ratio(w_a), rank_ratio(w_j)
        if min(ra, rj) >= algo.rank_one_ratio_min:
            break
        vec_a = np.linalg.eigh(0.5 * (w_a + w_a.conj().T))[1][:, -1]
        vec_j = np.linalg.eigh(0.5 * (w_j + w_j.conj().T))[1][:, -1]
        penalty = (weight_a, vec_a, weight_j, vec_j)
        weight_a /= algo.penalty_shrink  # heavier penalty each extra round
        weight_j /= algo.penalty_shrink

    rate_out = rate_sc(w_a, w_j, mats, cfg)
    if rate_out < rate_init:  # never regress below the warm start
        if init is None:
            w_a, w_j = mrt_half_power_init(mats, cfg)
        else:
            w_a = metrics.check_hermitian(np.asarray(init[0], dtype=complex), "init source")
            w_j = metrics.check_hermitian(np.asarray(init[1], dtype=complex), "init jammer")
        rate_out = rate_init
    ra, rj = rank_ratio(w_a), rank_ratio(w_j)
    info = BeamSolveInfo(
        sca_iterations=total_rounds,
        penalty_rounds=penalty_rounds,
        rate=rate_out,
        surrogate=rate_out,
        rank_ratio_alice=ra,
        rank_ratio_jack=rj,
        rank_one_ok=min(ra, rj) >= algo.rank_one_ratio_min,
        solver_status=status,
    )
    return w_a, w_j, info
