"""Problem containers and reports for the self-contained cone solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SolverReport:
    status: str  # success | max_iters | stalled | infeasible
    objective: float
    iterations: int
    stationarity: float
    constraint_violation: float
    backend: str
    wall_time: float

    @property
    def ok(self) -> bool:
        return self.status == "success"


@dataclass
class LogAffineSdpProblem:
    """Maximize  sum_t log2(offset_t + sum_v tr(C_tv X_v)) + sum_v tr(L_v X_v) + const

    over Hermitian PSD matrices X_v subject to shared trace budgets
    (``trace_groups``: each variable index appears in exactly one group, and
    the group's traces sum to at most its budget) and optional linear gain
    floors  sum_v tr(G_rv X_v) >= threshold_r.
    """

    dim: int
    n_vars: int
    trace_groups: tuple[tuple[tuple[int, ...], float], ...]
    log_offsets: np.ndarray  # (T,)
    log_coeffs: np.ndarray  # (T, V, M, M) Hermitian slices
    linear_coeffs: np.ndarray  # (V, M, M) Hermitian slices
    constant: float = 0.0
    gain_coeffs: np.ndarray | None = None  # (R, V, M, M)
    gain_thresholds: np.ndarray | None = None  # (R,)
    init: np.ndarray | None = None  # (V, M, M)

    def __post_init__(self) -> None:
        m, v = self.dim, self.n_vars
        self.log_offsets = np.atleast_1d(np.asarray(self.log_offsets, dtype=float))
        t = self.log_offsets.shape[0]
        self.log_coeffs = np.ascontiguousarray(self.log_coeffs, dtype=complex).reshape(t, v, m, m)
        self.linear_coeffs = np.ascontiguousarray(self.linear_coeffs, dtype=complex).reshape(v, m, m)
        if np.any(self.log_offsets <= 0):
            raise ValueError("log offsets must be strictly positive")
        seen: set[int] = set()
        groups = []
        for idxs, budget in self.trace_groups:
            idxs = tuple(int(i) for i in idxs)
            if budget < 0:
                raise ValueError("trace budgets must be nonnegative")
            if set(idxs) & seen:
                raise ValueError("variable assigned to two trace groups")
            seen.update(idxs)
            groups.append((idxs, float(budget)))
        if seen != set(range(v)):
            raise ValueError("every variable needs exactly one trace group")
        self.trace_groups = tuple(groups)
        if self.gain_coeffs is not None:
            self.gain_thresholds = np.atleast_1d(np.asarray(self.gain_thresholds, dtype=float))
            r = self.gain_thresholds.shape[0]
            self.gain_coeffs = np.ascontiguousarray(self.gain_coeffs, dtype=complex).reshape(r, v, m, m)
        if self.init is not None:
            self.init = np.ascontiguousarray(self.init, dtype=complex).reshape(v, m, m)

    @property
    def total_budget(self) -> float:
        return sum(b for _, b in self.trace_groups)


@dataclass
class ChainSocpProblem:
    """Maximize a per-waypoint linear objective over a feasible flight chain.

    Waypoints u[0..N] with u[0], u[N] pinned; every consecutive pair within
    ``edge_limit`` meters; optional per-waypoint trust balls (radius inf =
    absent). ``objective`` rows 0 and N are ignored.
    """

    objective: np.ndarray  # (N+1, 2)
    start: np.ndarray  # (2,)
    end: np.ndarray  # (2,)
    edge_limit: float
    trust_centers: np.ndarray | None = None  # (N+1, 2)
    trust_radii: np.ndarray | None = None  # (N+1,) or scalar
    init: np.ndarray | None = None  # (N+1, 2)

    def __post_init__(self) -> None:
        self.objective = np.ascontiguousarray(self.objective, dtype=float)
        n1 = self.objective.shape[0]
        if self.objective.shape != (n1, 2) or n1 < 2:
            raise ValueError("objective must be (N+1, 2) with N >= 1")
        self.start = np.asarray(self.start, dtype=float).reshape(2)
        self.end = np.asarray(self.end, dtype=float).reshape(2)
        if self.edge_limit <= 0:
            raise ValueError("edge_limit must be positive")
        if self.trust_centers is not None:
            self.trust_centers = np.ascontiguousarray(self.trust_centers, dtype=float).reshape(n1, 2)
        radii = self.trust_radii
        if radii is None:
            radii = np.inf
        radii = np.broadcast_to(np.asarray(radii, dtype=float), (n1,)).copy()
        radii[0] = np.inf
        radii[-1] = np.inf
        if np.any(radii < 0):
            raise ValueError("trust radii must be nonnegative")
        self.trust_radii = radii
        if self.trust_centers is None and np.any(np.isfinite(radii)):
            raise ValueError("finite trust radii require trust centers")
        if self.init is not None:
            self.init = np.ascontiguousarray(self.init, dtype=float).reshape(n1, 2)

    @property
    def n_edges(self) -> int:
        return self.objective.shape[0] - 1
