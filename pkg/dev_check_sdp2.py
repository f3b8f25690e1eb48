"""Dev scratch: accuracy at tight tolerance + cvxpy cross-check."""
import numpy as np
import cvxpy as cp

from cohsim.sdp import SdpProblem, solve

rng = np.random.default_rng(7)

# tight tolerance: robustness dual for random pure states, closed form (sum |c|)^2
print("== tight tol (1e-11) vs closed form ==")
for _ in range(6):
    d = int(rng.integers(2, 5))
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    rho = np.outer(v, v.conj())
    p = SdpProblem()
    S = p.psd_var("S", d)
    for j in range(d):
        p.add_eq(S.entry(j, j), 1.0)
    p.maximize(S.inner(rho))
    sol = solve(p, tol=1e-11)
    expect = float(np.abs(v).sum() ** 2)
    print(f" d={d} err={sol.primal_value - expect:+.3e} gap={sol.gap:.1e} it={sol.iterations}")

print("== random equality-constrained SDPs vs cvxpy ==")
for trial in range(8):
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, n * n // 2 + 2))
    C = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    C = (C + C.conj().T) / 2
    As, bs = [], []
    X0 = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    X0 = X0 @ X0.conj().T + np.eye(n)  # strictly feasible point
    for _ in range(m):
        F = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        F = (F + F.conj().T) / 2
        As.append(F)
        bs.append(float(np.trace(F @ X0).real))
    # cohsim
    p = SdpProblem()
    X = p.psd_var("X", n)
    for F, t in zip(As, bs):
        p.add_eq(X.inner(F), t)
    p.minimize(X.inner(C))
    sol = solve(p, tol=1e-9)
    # cvxpy
    Xc = cp.Variable((n, n), hermitian=True)
    cons = [Xc >> 0] + [cp.real(cp.trace(F @ Xc)) == t for F, t in zip(As, bs)]
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(C @ Xc))), cons)
    prob.solve(solver=cp.SCS, eps=1e-9)
    print(f" n={n} m={m} cohsim={sol.primal_value:+.8f} cvxpy={prob.value:+.8f} "
          f"diff={sol.primal_value - prob.value:+.2e} it={sol.iterations}")
