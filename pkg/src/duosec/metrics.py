"""Link-quality metrics: SINRs, secrecy rates, beampattern gains.

The per-slot secrecy rate is clamped at zero for *reporting*; optimizers
work with the unclamped difference, so both are exposed. In communication
slots the user and eavesdropper see the source signal against residual
jamming; in combined communication+sensing slots the dedicated sensing
covariance leaks in through the same channels, scaled by the sensing
residual factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import build_channel_set, outer
from .scenario import ScenarioConfig

LOG2E = float(np.log2(np.e))

SC = "sc"  # communication-only slot
SCS = "scs"  # communication + sensing slot

HERMITIAN_ATOL = 1e-9


def check_hermitian(mat: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate Hermitian symmetry (1e-9 absolute) and symmetrize exactly."""
    mat = np.asarray(mat)
    asym = np.max(np.abs(mat - np.conj(np.swapaxes(mat, -1, -2))), initial=0.0)
    if asym > HERMITIAN_ATOL * max(1.0, float(np.max(np.abs(mat), initial=0.0))):
        raise ValueError(f"{name} is not Hermitian (asymmetry {asym:.3e})")
    return 0.5 * (mat + np.conj(np.swapaxes(mat, -1, -2)))


def trace_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Re tr(A B) for (batched) Hermitian pairs."""
    return np.einsum("...ij,...ji->...", a, b).real


def quad_form(h: np.ndarray, w_mat: np.ndarray) -> np.ndarray:
    """h^H W h = tr(W h h^H), batched over leading axes."""
    return np.einsum("...i,...ij,...j->...", np.conj(h), w_mat, h).real


def sinr_sc(w_a, w_j, h_aq_mat, h_jq_mat, residual_jam: float, noise: float):
    """Receive SINR in a communication-only slot."""
    w_a = check_hermitian(w_a, "source covariance")
    w_j = check_hermitian(w_j, "jamming covariance")
    signal = trace_inner(h_aq_mat, w_a)
    interf = residual_jam * trace_inner(h_jq_mat, w_j)
    return signal / (interf + noise)


def sinr_scs(w_a, r_r, w_j, h_aq_mat, h_jq_mat, residual_sense: float,
             residual_jam: float, noise: float):
    """Receive SINR in a combined communication+sensing slot."""
    w_a = check_hermitian(w_a, "source covariance")
    r_r = check_hermitian(r_r, "sensing covariance")
    w_j = check_hermitian(w_j, "jamming covariance")
    signal = trace_inner(h_aq_mat, w_a)
    interf = (residual_sense * trace_inner(h_aq_mat, r_r)
              + residual_jam * trace_inner(h_jq_mat, w_j))
    return signal / (interf + noise)


def secrecy_rate(sinr_bob, sinr_eve, clamp: bool = True):
    """log2(1+SINR_b) - log2(1+SINR_e), clamped at zero unless asked not to."""
    rate = (np.log1p(sinr_bob) - np.log1p(sinr_eve)) * LOG2E
    return np.maximum(rate, 0.0) if clamp else rate


def beampattern_gain(w_a, r_r, w_j, a_at, a_jt, d_at, d_jt):
    """Distance-normalized illumination power summed over both UAVs.

    ``a_at``/``a_jt`` are steering vectors toward the target; the source
    UAV contributes through the total covariance W_a + R_r.
    """
    w_total = check_hermitian(w_a, "source covariance") + check_hermitian(r_r, "sensing covariance")
    w_j = check_hermitian(w_j, "jamming covariance")
    gain_a = quad_form(a_at, w_total) / np.asarray(d_at, dtype=float) ** 2
    gain_j = quad_form(a_jt, w_j) / np.asarray(d_jt, dtype=float) ** 2
    return gain_a + gain_j


@dataclass
class MetricsReport:
    """Everything derivable from (config, trajectories, beam plan)."""

    slot_labels: list[str]
    sinr_bob: np.ndarray
    sinr_eve: np.ndarray
    secrecy: np.ndarray  # clamped, bits/s/Hz per slot
    secrecy_unclamped: np.ndarray
    beampattern: np.ndarray  # (N, K); NaN outside sensing slots
    assigned_gain: np.ndarray  # (N,), NaN outside sensing slots
    sensing_feasible: np.ndarray  # (N,) bool, vacuously True outside sensing slots
    power_residual_alice: np.ndarray  # tr - budget, positive means violation
    power_residual_jack: np.ndarray
    displacement_residual: np.ndarray  # (2, N) per UAV, per edge
    asr: float
    asr_sc: float
    asr_scs: float
    sum_secrecy: float
    power_feasible: bool
    displacement_feasible: bool
    feasible: bool
    extras: dict = field(default_factory=dict)

    def summary_dict(self) -> dict:
        return {
            "asr": self.asr,
            "asr_sc": self.asr_sc,
            "asr_scs": self.asr_scs,
            "sum_secrecy": self.sum_secrecy,
            "feasible": bool(self.feasible),
            "power_feasible": bool(self.power_feasible),
            "displacement_feasible": bool(self.displacement_feasible),
            "sensing_feasible": bool(np.all(self.sensing_feasible)),
            "min_assigned_gain": (float(np.nanmin(self.assigned_gain))
                                  if np.any(np.isfinite(self.assigned_gain)) else None),
        }


def evaluate(cfg: ScenarioConfig, traj_alice, traj_jack, w_a: np.ndarray,
             w_j: np.ndarray, r_r: np.ndarray | None = None,
             slot_labels=None, assignment=None) -> MetricsReport:
    """Recompute every metric from first principles.

    ``assignment`` maps slot index -> target index (-1 where none); when
    absent, a sensing slot's feasibility uses its best-gain target.
    """
    n, m = cfg.n_slots, cfg.n_antennas
    w_a = check_hermitian(np.asarray(w_a, dtype=complex).reshape(n, m, m), "source covariance")
    w_j = check_hermitian(np.asarray(w_j, dtype=complex).reshape(n, m, m), "jamming covariance")
    if r_r is None:
        r_r = np.zeros_like(w_a)
    else:
        r_r = check_hermitian(np.asarray(r_r, dtype=complex).reshape(n, m, m), "sensing covariance")
    labels = list(slot_labels) if slot_labels is not None else [SC] * n
    if len(labels) != n or any(lbl not in (SC, SCS) for lbl in labels):
        raise ValueError("slot_labels must contain 'sc'/'scs' per slot")
    assign = (np.full(n, -1, dtype=int) if assignment is None
              else np.asarray(assignment, dtype=int).reshape(n))

    cs = build_channel_set(cfg, traj_alice, traj_jack)
    sig_b = quad_form(cs.h_ab, w_a)
    sig_e = quad_form(cs.h_ae, w_a)
    jam_b = quad_form(cs.h_jb, w_j)
    jam_e = quad_form(cs.h_je, w_j)
    sense_b = quad_form(cs.h_ab, r_r)
    sense_e = quad_form(cs.h_ae, r_r)

    is_scs = np.array([lbl == SCS for lbl in labels])
    noise_b, noise_e = cfg.noise_power["bob"], cfg.noise_power["eve"]
    den_b = cfg.residual_jam_bob * jam_b + noise_b
    den_e = cfg.residual_jam_eve * jam_e + noise_e
    den_b = den_b + np.where(is_scs, cfg.residual_sense_bob * sense_b, 0.0)
    den_e = den_e + np.where(is_scs, cfg.residual_sense_eve * sense_e, 0.0)
    g_bob = sig_b / den_b
    g_eve = sig_e / den_e
    rate_raw = secrecy_rate(g_bob, g_eve, clamp=False)
    rate = np.maximum(rate_raw, 0.0)

    k = len(cfg.targets)
    gains = np.full((n, k), np.nan)
    assigned_gain = np.full(n, np.nan)
    sensing_ok = np.ones(n, dtype=bool)
    tol = cfg.algo.solver_tol
    gamma = cfg.beampattern_threshold
    scs_idx = np.flatnonzero(is_scs)
    if scs_idx.size and k:
        w_tot = w_a[scs_idx] + r_r[scs_idx]
        ga = quad_form(cs.a_at[scs_idx], w_tot[:, None]) / cs.d_at[scs_idx] ** 2
        gj = quad_form(cs.a_jt[scs_idx], w_j[scs_idx, None]) / cs.d_jt[scs_idx] ** 2
        gains[scs_idx] = ga + gj
        for s in scs_idx:
            t = assign[s]
            assigned_gain[s] = gains[s, t] if t >= 0 else np.max(gains[s])
            sensing_ok[s] = assigned_gain[s] >= gamma - tol

    p_a, p_j = cfg.p_max["alice"], cfg.p_max["jack"]
    tr_a = np.einsum("nii->n", w_a).real + np.einsum("nii->n", r_r).real
    tr_j = np.einsum("nii->n", w_j).real
    pow_res_a = tr_a - p_a
    pow_res_j = tr_j - p_j
    power_ok = bool(np.all(pow_res_a <= tol * max(1.0, p_a))
                    and np.all(pow_res_j <= tol * max(1.0, p_j)))

    vmax = cfg.slot_displacement
    disp_res = np.empty((2, n))
    for i, traj in enumerate((traj_alice, traj_jack)):
        wp = np.asarray(getattr(traj, "waypoints", traj), dtype=float)
        disp_res[i] = np.linalg.norm(np.diff(wp, axis=0), axis=1) - vmax
    disp_ok = bool(np.all(disp_res <= tol * max(1.0, vmax)))

    sc_rates = rate[~is_scs]
    scs_rates = rate[is_scs]
    report = MetricsReport(
        slot_labels=labels,
        sinr_bob=g_bob,
        sinr_eve=g_eve,
        secrecy=rate,
        secrecy_unclamped=rate_raw,
        beampattern=gains,
        assigned_gain=assigned_gain,
        sensing_feasible=sensing_ok,
        power_residual_alice=pow_res_a,
        power_residual_jack=pow_res_j,
        displacement_residual=disp_res,
        asr=float(np.mean(rate)),
        asr_sc=float(np.mean(sc_rates)) if sc_rates.size else 0.0,
        asr_scs=float(np.mean(scs_rates)) if scs_rates.size else 0.0,
        sum_secrecy=float(np.sum(rate)),
        power_feasible=power_ok,
        displacement_feasible=disp_ok,
        feasible=bool(power_ok and disp_ok and np.all(sensing_ok)),
    )
    return report


__all__ = [
    "SC", "SCS", "LOG2E", "MetricsReport", "beampattern_gain", "check_hermitian",
    "evaluate", "outer", "quad_form", "secrecy_rate", "sinr_sc", "sinr_scs",
    "trace_inner",
]
