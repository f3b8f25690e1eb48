import numpy as np
import pytest

from cohsim import linalg as la
from cohsim.sdp import (
    MatExpr,
    SdpProblem,
    SolverError,
    embed_complex,
    problem_from_json,
    problem_to_json,
    solve,
)


def _lambda_max_problem(target):
    p = SdpProblem()
    t = p.scalar_var("t")
    p.add_psd(p.scalar_times_eye(t, target.shape[0]) - MatExpr.constant(target))
    p.minimize(t)
    return p


def _robustness_dual_problem(rho):
    p = SdpProblem()
    s = p.psd_var("S", rho.shape[0])
    for j in range(rho.shape[0]):
        p.add_eq(s.entry(j, j), 1.0)
    p.maximize(s.inner(rho))
    return p


def test_lambda_max_diag():
    sol = solve(_lambda_max_problem(np.diag([3.0, 1.0])))
    assert sol.status == "optimal"
    assert abs(sol.primal_value - 3.0) < 1e-6
    assert abs(sol.scalar_values["t"] - 3.0) < 1e-6


def test_robustness_dual_cosbit():
    sol = solve(_robustness_dual_problem(la.projector(la.cosdit(2))))
    assert sol.status == "optimal"
    assert abs(sol.primal_value - 2.0) < 1e-6
    s = sol.block_values["S"]
    assert np.linalg.eigvalsh(s).min() > -1e-7
    assert np.abs(np.diag(s).real - 1.0).max() < 1e-6


def test_infeasible_toy():
    p = SdpProblem()
    x = p.psd_var("X", 2)
    p.add_eq(x.trace(), -1.0)
    p.minimize(x.trace())
    sol = solve(p)
    assert sol.status == "infeasible"
    assert "certificate" in sol.diagnostics
    with pytest.raises(SolverError):
        sol.require_optimal()


def test_unbounded_detected():
    p = SdpProblem()
    x = p.psd_var("X", 2)
    p.minimize(x.inner(np.diag([1.0, -1.0])))
    assert solve(p).status == "unbounded"


def test_embed_complex_real_problem_doubles():
    target = np.diag([2.0, -1.0])
    p = _lambda_max_problem(target)
    q = embed_complex(p)
    assert all(not b.complex for b in q.blocks.values())
    assert all(b.dim == 2 * pb.dim for b, pb in zip(q.blocks.values(), p.blocks.values()))
    sol_p = solve(p)
    sol_q = solve(q)
    assert abs(sol_p.primal_value - sol_q.primal_value) < 1e-6


def test_embed_complex_pauli_y():
    y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
    sol = solve(embed_complex(_lambda_max_problem(y)))
    assert abs(sol.primal_value - 1.0) < 1e-6


def test_embed_complex_matches_direct_solve():
    rho = la.projector(la.cosdit(2))
    direct = solve(_robustness_dual_problem(rho)).primal_value
    embedded = solve(embed_complex(_robustness_dual_problem(rho))).primal_value
    assert abs(direct - embedded) < 2e-7


def test_weak_duality_on_min_problems():
    rng = np.random.default_rng(14)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        c = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        c = (c + c.conj().T) / 2
        p = SdpProblem()
        x = p.psd_var("X", n)
        p.add_eq(x.trace(), 1.0)
        p.minimize(x.inner(c))
        sol = solve(p)
        assert sol.status == "optimal"
        # weak duality up to the declared gap tolerance tol*(1+|primal|)
        assert sol.primal_value >= sol.dual_value - 1e-7 * (1 + abs(sol.primal_value))
        assert abs(sol.primal_value - np.linalg.eigvalsh(c).min()) < 1e-6


def test_constraint_order_invariance():
    rng = np.random.default_rng(15)
    rho = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = rho @ rho.conj().T
    rho /= np.trace(rho).real
    base = _robustness_dual_problem(rho)
    ref = solve(base).primal_value
    for seed in range(3):
        perm_rng = np.random.default_rng(seed)
        p = _robustness_dual_problem(rho)
        order = perm_rng.permutation(len(p.equalities))
        p.equalities = [p.equalities[i] for i in order]
        assert abs(solve(p).primal_value - ref) <= 10 * 1e-7


def test_tighter_tol_consistency():
    rho = la.projector(np.array([0.8, 0.6], dtype=complex))
    coarse = solve(_robustness_dual_problem(rho), tol=1e-7).primal_value
    fine = solve(_robustness_dual_problem(rho), tol=1e-8).primal_value
    assert abs(coarse - fine) <= 10 * 1e-7


def test_redundant_rows_are_dropped():
    rho = la.projector(la.cosdit(3))
    p = _robustness_dual_problem(rho)
    p.equalities = p.equalities + p.equalities  # exact duplicates
    sol = solve(p)
    assert sol.status == "optimal"
    assert abs(sol.primal_value - 3.0) < 1e-6


def test_inconsistent_duplicate_rows_infeasible():
    p = SdpProblem()
    x = p.psd_var("X", 2)
    p.add_eq(x.trace(), 1.0)
    p.add_eq(x.trace(), 2.0)
    p.minimize(x.entry(0, 0))
    assert solve(p).status == "infeasible"


def test_iteration_cap_reports_failure():
    p = _robustness_dual_problem(la.projector(la.cosdit(2)))
    sol = solve(p, max_iter=2)
    assert sol.status == "numeric-failure"
    assert "reason" in sol.diagnostics


def test_tol_validation():
    p = _lambda_max_problem(np.eye(2))
    with pytest.raises(ValueError):
        solve(p, tol=1.0)
    with pytest.raises(ValueError):
        solve(p, tol=1e-13)


def test_inequality_slacks():
    # max t s.t. t <= 5 realized via slack block
    p = SdpProblem()
    x = p.psd_var("X", 2)
    p.add_ineq(x.trace(), "<=", 5.0)
    p.maximize(x.entry(0, 0))
    sol = solve(p)
    assert abs(sol.primal_value - 5.0) < 1e-6


def test_matrix_equality_with_partial_trace():
    # feasibility of a CPTP Choi block: tr_out J = I_in
    p = SdpProblem()
    j = p.psd_var("J", 4)
    p.add_matrix_eq(j.ptrace([2, 2], keep=[0]), np.eye(2))
    p.maximize(j.entry(0, 0))
    sol = solve(p)
    assert sol.status == "optimal"
    jv = sol.block_values["J"]
    assert np.abs(la.partial_trace(jv, [2, 2], keep=[0]) - np.eye(2)).max() < 1e-6
    assert np.linalg.eigvalsh(jv).min() > -1e-7


def test_problem_json_roundtrip():
    rho = la.projector(la.cosdit(2))
    p = _robustness_dual_problem(rho)
    q = problem_from_json(problem_to_json(p))
    a = solve(p).primal_value
    b = solve(q).primal_value
    assert abs(a - b) < 1e-9


def test_solution_blocks_psd_within_tol():
    rng = np.random.default_rng(21)
    rho = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = rho @ rho.conj().T
    rho /= np.trace(rho).real
    sol = solve(_robustness_dual_problem(rho))
    assert sol.gap <= 1e-7 * (1 + abs(sol.primal_value))
    for v in sol.block_values.values():
        assert np.linalg.eigvalsh(v).min() > -1e-7
