"""Pure-numpy reference backend for the cone solvers.

Mirrors the algorithm skeleton of the compiled kernels so both backends can
be benchmarked against each other and swapped freely at import time.
"""

from __future__ import annotations

import numpy as np

LOG2E = float(np.log2(np.e))

STATUS_SUCCESS = 0
STATUS_MAX_ITERS = 1
STATUS_STALLED = 2
STATUS_INFEASIBLE = 3


def eigh_hermitian(mat: np.ndarray):
    """Eigenvalues/eigenvectors of a Hermitian matrix (ascending order)."""
    sym = np.asarray(mat, dtype=complex)
    sym = 0.5 * (sym + sym.conj().T)
    return np.linalg.eigh(sym)


def capped_simplex(values: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection of ``values`` onto {x >= 0, sum(x) <= budget}."""
    values = np.asarray(values, dtype=float)
    if budget <= 0.0:
        return np.zeros_like(values)
    clipped = np.clip(values, 0.0, None)
    if clipped.sum() <= budget:
        return clipped
    srt = np.sort(values)[::-1]
    csum = np.cumsum(srt)
    ks = np.arange(1, srt.size + 1)
    thetas = (csum - budget) / ks
    valid = np.flatnonzero(srt - thetas > 0)
    # k = 1 always qualifies in exact arithmetic (budget > 0 here); fall back
    # to it when rounding makes srt[0] - thetas[0] collapse to <= 0
    theta = thetas[valid[-1]] if valid.size else thetas[0]
    return np.clip(values - theta, 0.0, None)


def project_psd_trace(mat: np.ndarray, trace_budget: float) -> np.ndarray:
    """Project a Hermitian matrix onto {X >= 0, tr(X) <= trace_budget}."""
    mat = np.asarray(mat, dtype=complex)
    sym = 0.5 * (mat + mat.conj().T)
    evals, evecs = np.linalg.eigh(sym)
    capped = capped_simplex(evals, float(trace_budget))
    return (evecs * capped) @ evecs.conj().T


def _project_groups(x: np.ndarray, groups) -> np.ndarray:
    """Jointly project stacked Hermitian blocks onto grouped trace caps.

    The feasible set is block-diagonal per group, so projecting the
    block-diagonal embedding reduces to one eigendecomposition per matrix
    plus a capped-simplex projection of the stacked eigenvalues.
    """
    out = np.empty_like(x)
    for idxs, budget in groups:
        evals = []
        evecs = []
        for i in idxs:
            sym = 0.5 * (x[i] + x[i].conj().T)
            w, v = np.linalg.eigh(sym)
            evals.append(w)
            evecs.append(v)
        stacked = capped_simplex(np.concatenate(evals), budget)
        m = x.shape[-1]
        for j, i in enumerate(idxs):
            lam = stacked[j * m:(j + 1) * m]
            out[i] = (evecs[j] * lam) @ evecs[j].conj().T
    return out


def _trace_pairs(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    # coeffs (..., V, M, M), x (V, M, M) -> real traces summed over V
    return np.einsum("...vij,vji->...", coeffs, x).real


def pga_log_affine(x, log_offsets, log_coeffs, lin_coeffs, gain_coeffs,
                   gain_thresholds, gain_multipliers, gain_rho, groups,
                   tol, max_iters):
    """Projected gradient ascent with Armijo backtracking.

    Maximizes the log-affine objective plus an augmented-Lagrangian term for
    the gain floors (``gain_rho == 0`` disables it). ``x`` is updated in
    place; returns (objective, iterations, stationarity, status).
    """
    n_gain = gain_thresholds.shape[0]

    def value_grad(xc, want_grad):
        args = log_offsets + _trace_pairs(log_coeffs, xc)
        if np.any(args <= 0):
            return -np.inf, None
        val = np.log2(args).sum() + _trace_pairs(lin_coeffs, xc)
        grad = None
        if want_grad:
            grad = np.einsum("t,tvij->vij", LOG2E / args, log_coeffs) + lin_coeffs
        if n_gain:
            slack = gain_multipliers + gain_rho * (gain_thresholds - _trace_pairs(gain_coeffs, xc))
            active = np.clip(slack, 0.0, None)
            val -= float(((active ** 2 - gain_multipliers ** 2) / (2.0 * gain_rho)).sum())
            if want_grad:
                grad = grad + np.einsum("r,rvij->vij", active, gain_coeffs)
        return float(val), grad

    f_cur, grad = value_grad(x, True)
    alpha = 1.0
    stat = np.inf
    status = STATUS_MAX_ITERS
    it = 0
    check_every = 25
    for it in range(1, max_iters + 1):
        stepped = False
        for _ in range(60):
            trial = _project_groups(x + alpha * grad, groups)
            delta = trial - x
            inner = float(np.einsum("vij,vij->", grad.conj(), delta).real)
            step_norm = float(np.linalg.norm(delta))
            if step_norm == 0.0:
                break
            f_trial, _ = value_grad(trial, False)
            if f_trial >= f_cur + 1e-4 * inner and np.isfinite(f_trial):
                x[...] = trial
                f_cur = f_trial
                alpha *= 1.25
                stepped = True
                break
            alpha *= 0.5
            if alpha < 1e-18:
                break
        small_step = (not stepped) or step_norm <= tol
        if small_step or it % check_every == 0:
            probe = _project_groups(x + grad, groups)
            stat = float(np.linalg.norm(probe - x))
            if stat <= tol:
                status = STATUS_SUCCESS
                break
            if not stepped:
                status = STATUS_STALLED
                break
        if stepped:
            _, grad = value_grad(x, True)
    return f_cur, it, stat, status


def _chain_violation(u, edge_limit, centers, radii):
    steps = np.linalg.norm(np.diff(u, axis=0), axis=1)
    viol = float(np.max(np.clip(steps - edge_limit, 0.0, None), initial=0.0))
    if centers is not None:
        finite = np.isfinite(radii)
        if np.any(finite):
            drift = np.linalg.norm(u[finite] - centers[finite], axis=1) - radii[finite]
            viol = max(viol, float(np.max(np.clip(drift, 0.0, None), initial=0.0)))
    return viol


def _dykstra_chain(u, edge_limit, centers, radii, ftol, max_sweeps=2000):
    """Dykstra projection onto the chain set, modifying ``u`` in place.

    Families: odd-index edges, even-index edges (disjoint waypoint scopes
    within each family), then the trust balls. Endpoint rows never move.
    """
    n1 = u.shape[0]
    odd = np.arange(1, n1, 2)
    even = np.arange(2, n1, 2)
    corrections = [np.zeros_like(u) for _ in range(3)]
    have_trust = centers is not None and np.any(np.isfinite(radii))

    def project_edges(w, edge_idx):
        prev = edge_idx - 1
        d = w[edge_idx] - w[prev]
        dist = np.linalg.norm(d, axis=1)
        over = dist > edge_limit
        if not np.any(over):
            return w
        unit = np.zeros_like(d)
        unit[over] = d[over] / dist[over, None]
        excess = (dist - edge_limit)[:, None]
        prev_free = prev >= 1
        cur_free = edge_idx <= n1 - 2
        share_prev = np.where(prev_free & cur_free, 0.5, np.where(prev_free, 1.0, 0.0))
        share_cur = np.where(prev_free & cur_free, 0.5, np.where(cur_free, 1.0, 0.0))
        w[prev] += (over[:, None] * share_prev[:, None]) * excess * unit
        w[edge_idx] -= (over[:, None] * share_cur[:, None]) * excess * unit
        return w

    def project_trust(w):
        finite = np.isfinite(radii)
        d = w[finite] - centers[finite]
        dist = np.linalg.norm(d, axis=1)
        over = dist > radii[finite]
        if np.any(over):
            scale = np.ones_like(dist)
            scale[over] = radii[finite][over] / dist[over]
            w[finite] = centers[finite] + d * scale[:, None]
        return w

    for sweep in range(1, max_sweeps + 1):
        before = u.copy()
        for fam in range(3):
            w = u + corrections[fam]
            if fam == 0:
                proj = project_edges(w.copy(), odd)
            elif fam == 1:
                proj = project_edges(w.copy(), even) if even.size else w
            else:
                proj = project_trust(w.copy()) if have_trust else w
            corrections[fam] = w - proj
            u = proj
        if _chain_violation(u, edge_limit, centers, radii) <= ftol \
                and float(np.abs(u - before).max()) <= ftol:
            return u, sweep, True
    return u, max_sweeps, _chain_violation(u, edge_limit, centers, radii) <= 10 * ftol


def chain_socp(u, objective, edge_limit, centers, radii, tol, max_iters):
    """Projected gradient ascent for a linear objective over the chain set.

    ``u`` (N+1, 2) is updated in place; rows 0 and N stay pinned. Returns
    (objective value, iterations, stationarity, violation, status).
    """
    grad = objective.copy()
    grad[0] = 0.0
    grad[-1] = 0.0
    tol_u = tol * max(1.0, edge_limit)  # waypoint accuracy, meters
    ftol = max(0.01 * tol_u, 1e-14)

    u[...], _, feas = _dykstra_chain(u.copy(), edge_limit, centers, radii, ftol)
    if not feas:
        viol = _chain_violation(u, edge_limit, centers, radii)
        return float((grad * u).sum()), 0, np.inf, viol, STATUS_INFEASIBLE

    gnorm = float(np.linalg.norm(grad))
    viol0 = _chain_violation(u, edge_limit, centers, radii)
    if gnorm == 0.0:
        return float((grad * u).sum()), 0, 0.0, viol0, STATUS_SUCCESS
    n_edges = u.shape[0] - 1
    scale = edge_limit / gnorm
    alpha = scale
    alpha_hi = 4.0 * n_edges * scale  # beyond set diameter, larger steps add nothing
    status = STATUS_MAX_ITERS
    stat = np.inf
    it = 0
    next_probe = 1
    window = 64
    f_mark = float((grad * u).sum())
    for it in range(1, max_iters + 1):
        trial, _, _ = _dykstra_chain(u + alpha * grad, edge_limit, centers, radii, ftol)
        inner = float((grad * (trial - u)).sum())
        u[...] = trial
        alpha = alpha * 2.0 if inner > 0.5 * alpha * gnorm ** 2 else alpha * 0.7
        alpha = min(max(alpha, 1e-4 * scale), alpha_hi)
        if it >= next_probe and (it % 8 == 0 or inner <= 0.1 * tol_u * gnorm):
            probe, _, _ = _dykstra_chain(u + scale * grad, edge_limit, centers, radii, ftol)
            stat = float(np.abs(probe - u).max())
            if stat <= tol_u:
                status = STATUS_SUCCESS
                break
            next_probe = it + 8
        if it % window == 0:
            f_now = float((grad * u).sum())
            if f_now - f_mark <= tol_u * gnorm:  # one tol-sized move along grad
                status = STATUS_SUCCESS
                break
            f_mark = f_now
    viol = _chain_violation(u, edge_limit, centers, radii)
    return float((grad * u).sum()), it, stat, viol, status
