"""First-order cone solvers used by the planning pipeline.

Two interchangeable backends (compiled kernels / pure numpy) implement the
same projected-gradient algorithms; linear gain floors are enforced with an
augmented-Lagrangian outer loop around the projected ascent.
"""

from __future__ import annotations

import time

import numpy as np

from . import reference
from .backend import active_backend_name, available_backends, get_backend
from .problems import ChainSocpProblem, LogAffineSdpProblem, SolverReport

__all__ = [
    "ChainSocpProblem",
    "LogAffineSdpProblem",
    "SolverReport",
    "active_backend_name",
    "available_backends",
    "get_backend",
    "gain_values",
    "objective_value",
    "project_psd_trace",
    "solve_chain_socp",
    "solve_log_affine_sdp",
]

_STATUS_NAMES = {0: "success", 1: "max_iters", 2: "stalled", 3: "infeasible"}


def project_psd_trace(mat: np.ndarray, trace_budget: float, backend: str | None = None) -> np.ndarray:
    _, mod = get_backend(backend)
    return mod.project_psd_trace(mat, float(trace_budget))


def objective_value(problem: LogAffineSdpProblem, x: np.ndarray) -> float:
    """Clean objective (no penalty terms) at ``x``, including the constant."""
    args = problem.log_offsets + np.einsum("tvij,vji->t", problem.log_coeffs, x).real
    if np.any(args <= 0):
        return -np.inf
    val = float(np.log2(args).sum())
    val += float(np.einsum("vij,vji->", problem.linear_coeffs, x).real)
    return val + problem.constant


def gain_values(problem: LogAffineSdpProblem, x: np.ndarray) -> np.ndarray:
    if problem.gain_coeffs is None:
        return np.zeros(0)
    return np.einsum("rvij,vji->r", problem.gain_coeffs, x).real


def _feasible_start(problem: LogAffineSdpProblem) -> np.ndarray:
    m, v = problem.dim, problem.n_vars
    if problem.init is not None:
        x = 0.5 * (problem.init + np.conj(np.swapaxes(problem.init, -1, -2)))
    else:
        x = np.zeros((v, m, m), dtype=complex)
    return np.ascontiguousarray(reference._project_groups(x, problem.trace_groups))


def solve_log_affine_sdp(problem: LogAffineSdpProblem, tol: float = 1e-7,
                         max_iters: int = 50000, backend: str | None = None):
    """Returns (x, SolverReport) with x of shape (n_vars, dim, dim)."""
    name, mod = get_backend(backend)
    t0 = time.perf_counter()
    x = _feasible_start(problem)
    m = problem.dim

    if problem.gain_coeffs is None:
        empty_g = np.zeros((0, problem.n_vars, m, m), dtype=complex)
        empty_t = np.zeros(0)
        _, iters, stat, code = mod.pga_log_affine(
            x, problem.log_offsets, problem.log_coeffs, problem.linear_coeffs,
            empty_g, empty_t, empty_t.copy(), 0.0, problem.trace_groups,
            tol, max_iters)
        viol = 0.0
        status = _STATUS_NAMES[int(code)]
    else:
        thr = problem.gain_thresholds
        lam = np.zeros_like(thr)
        rho = max(1e6, 1.0 / max(float(thr.min()), 1e-12) ** 2)
        gain_tol = max(1e-9, 1e-3 * tol)
        iters = 0
        stat = np.inf
        code = 1
        prev_viol = np.inf
        for _ in range(30):
            _, it_k, stat, code = mod.pga_log_affine(
                x, problem.log_offsets, problem.log_coeffs, problem.linear_coeffs,
                problem.gain_coeffs, thr, lam, rho, problem.trace_groups,
                tol, max_iters)
            iters += int(it_k)
            gains = gain_values(problem, x)
            viol = float(np.max(np.clip(thr - gains, 0.0, None), initial=0.0))
            lam = np.clip(lam + rho * (thr - gains), 0.0, None)
            if viol <= gain_tol:
                break
            if viol > 0.25 * prev_viol:
                rho = min(rho * 10.0, 1e16)
            prev_viol = viol
        status = _STATUS_NAMES[int(code)]
        if viol > gain_tol and status == "success":
            status = "infeasible"

    x = 0.5 * (x + np.conj(np.swapaxes(x, -1, -2)))
    report = SolverReport(
        status=status,
        objective=objective_value(problem, x),
        iterations=int(iters),
        stationarity=float(stat),
        constraint_violation=float(viol),
        backend=name,
        wall_time=time.perf_counter() - t0,
    )
    return x, report


def solve_chain_socp(problem: ChainSocpProblem, tol: float = 1e-7,
                     max_iters: int = 50000, backend: str | None = None):
    """Returns (waypoints, SolverReport) with waypoints of shape (N+1, 2)."""
    name, mod = get_backend(backend)
    t0 = time.perf_counter()
    n1 = problem.objective.shape[0]
    n_edges = problem.n_edges
    if problem.init is not None:
        u = problem.init.copy()
    else:
        frac = np.linspace(0.0, 1.0, n1)[:, None]
        u = (1.0 - frac) * problem.start + frac * problem.end
    u[0] = problem.start
    u[-1] = problem.end
    u = np.ascontiguousarray(u)

    span = float(np.linalg.norm(problem.end - problem.start))
    if span > n_edges * problem.edge_limit * (1.0 + 1e-12) + 1e-9:
        report = SolverReport(
            status="infeasible",
            objective=float((problem.objective[1:-1] * u[1:-1]).sum()),
            iterations=0,
            stationarity=np.inf,
            constraint_violation=span / n_edges - problem.edge_limit,
            backend=name,
            wall_time=time.perf_counter() - t0,
        )
        return u, report

    obj, iters, stat, viol, code = mod.chain_socp(
        u, problem.objective, problem.edge_limit, problem.trust_centers,
        problem.trust_radii, tol, max_iters)
    report = SolverReport(
        status=_STATUS_NAMES[int(code)],
        objective=float(obj),
        iterations=int(iters),
        stationarity=float(stat),
        constraint_violation=float(viol),
        backend=name,
        wall_time=time.perf_counter() - t0,
    )
    return u, report
