import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from duosec.solvers import (ChainSocpProblem, LogAffineSdpProblem,
                            gain_values, objective_value, project_psd_trace,
                            solve_chain_socp, solve_log_affine_sdp)
from duosec.solvers import reference
from duosec.solvers.backend import available_backends


def test_capped_simplex_hand_case():
    got = reference.capped_simplex(np.array([3.0, 2.0, 1.0]), 3.0)
    assert np.allclose(got, [2.0, 1.0, 0.0])


def test_capped_simplex_zero_budget():
    got = reference.capped_simplex(np.array([3.0, -1.0]), 0.0)
    assert np.allclose(got, 0.0)


def test_capped_simplex_noop_when_feasible():
    vals = np.array([0.5, 0.25, -2.0])
    got = reference.capped_simplex(vals, 10.0)
    assert np.allclose(got, [0.5, 0.25, 0.0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8),
       st.floats(0, 10))
def test_capped_simplex_is_projection(vals, budget):
    vals = np.asarray(vals)
    got = reference.capped_simplex(vals, budget)
    assert np.all(got >= 0.0)
    assert got.sum() <= budget + 1e-9
    # no strictly-feasible point is closer (projection optimality, sampled)
    rng = np.random.default_rng(1)
    base_d = np.linalg.norm(vals - got)
    for _ in range(20):
        p = rng.uniform(0, 1, size=vals.size)
        p *= rng.uniform(0, 1) * budget / max(p.sum(), 1e-300)
        assert np.linalg.norm(vals - p) >= base_d - 1e-7


def test_project_psd_trace_hand_case():
    got = project_psd_trace(np.diag([2.0, -1.0]).astype(complex), 10.0)
    assert np.allclose(got, np.diag([2.0, 0.0]))


def test_project_psd_trace_properties(rng):
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    x = x + x.conj().T
    out = project_psd_trace(x, 1.5)
    evals = np.linalg.eigvalsh(out)
    assert evals.min() >= -1e-12
    assert np.trace(out).real <= 1.5 + 1e-9
    # idempotent
    again = project_psd_trace(out, 1.5)
    assert np.allclose(again, out, atol=1e-10)


def _lambda_max_problem(rng, m=3, budget=2.0):
    x = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    c = x @ x.conj().T
    prob = LogAffineSdpProblem(
        dim=m, n_vars=1, trace_groups=(((0,), budget),),
        log_offsets=[1.0], log_coeffs=[[np.zeros((m, m), complex)]],
        linear_coeffs=[c], constant=0.0)
    return prob, budget * float(np.linalg.eigvalsh(c)[-1])


@pytest.mark.parametrize("backend", available_backends())
def test_log_affine_linear_is_scaled_lambda_max(backend, rng):
    prob, want = _lambda_max_problem(rng)
    x, rep = solve_log_affine_sdp(prob, tol=1e-9, backend=backend)
    assert rep.objective == pytest.approx(want, rel=1e-6)
    assert objective_value(prob, x) == pytest.approx(rep.objective)


def test_log_affine_concave_log_term(rng):
    # maximize log2(1 + tr(X)) with tr(X) <= 2 -> log2(3) at the cap
    m = 2
    prob = LogAffineSdpProblem(
        dim=m, n_vars=1, trace_groups=(((0,), 2.0),),
        log_offsets=[1.0], log_coeffs=[[np.eye(m, dtype=complex)]],
        linear_coeffs=[np.zeros((m, m), complex)], constant=0.0)
    x, rep = solve_log_affine_sdp(prob, tol=1e-9)
    assert rep.objective == pytest.approx(np.log2(3.0), rel=1e-6)


def test_log_affine_gain_floor_is_enforced(rng):
    # linear objective pulls X toward e1; the floor demands energy on e2
    m = 2
    c = np.diag([1.0, 0.0]).astype(complex)
    floor_mat = np.diag([0.0, 1.0]).astype(complex)
    prob = LogAffineSdpProblem(
        dim=m, n_vars=1, trace_groups=(((0,), 1.0),),
        log_offsets=[1.0], log_coeffs=[[np.zeros((m, m), complex)]],
        linear_coeffs=[c], constant=0.0,
        gain_coeffs=[[floor_mat]], gain_thresholds=[0.25])
    x, rep = solve_log_affine_sdp(prob, tol=1e-9)
    gains = gain_values(prob, x)
    assert gains[0] >= 0.25 - 1e-6
    assert rep.objective == pytest.approx(0.75, abs=1e-4)


def test_chain_socp_two_ball_oracle():
    # one free waypoint pulled upward between fixed endpoints
    chain = ChainSocpProblem(
        objective=np.array([[0.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),
        start=np.array([-5.0, 0.0]), end=np.array([5.0, 0.0]),
        edge_limit=10.0)
    u, rep = solve_chain_socp(chain, tol=1e-10)
    assert u[1, 1] == pytest.approx(np.sqrt(75.0), abs=1e-6)
    assert np.allclose(u[0], [-5.0, 0.0]) and np.allclose(u[2], [5.0, 0.0])


def test_chain_socp_trust_region_binds():
    chain = ChainSocpProblem(
        objective=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]),
        start=np.array([0.0, 0.0]), end=np.array([0.0, 0.0]),
        edge_limit=100.0,
        trust_centers=np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]),
        trust_radii=0.5)
    u, rep = solve_chain_socp(chain, tol=1e-10)
    assert u[1, 0] == pytest.approx(0.5, abs=1e-6)


def test_chain_backends_agree(rng):
    # keep the reference-backend instance tiny and the tolerance modest:
    # its projected-gradient loop converges far more slowly than the native
    # kernel, which the dedicated benchmark quantifies
    n = 3
    obj = rng.normal(size=(n + 1, 2))
    obj[0] = 0
    chain = ChainSocpProblem(
        objective=obj, start=np.array([0.0, 0.0]), end=np.array([3.0, 0.0]),
        edge_limit=2.0)
    vals = {}
    for backend in available_backends():
        u, rep = solve_chain_socp(chain, tol=1e-6, backend=backend)
        steps = np.linalg.norm(np.diff(u, axis=0), axis=1)
        assert steps.max() <= 2.0 + 1e-6
        assert np.allclose(u[0], chain.start) and np.allclose(u[-1], chain.end)
        vals[backend] = float(np.sum(obj * u))
    assert vals["native"] == pytest.approx(vals["reference"], abs=1e-3)


def test_backends_list():
    names = available_backends()
    assert "reference" in names
