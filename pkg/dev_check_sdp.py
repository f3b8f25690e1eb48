"""Dev scratch: validate the IPM on problems with known answers."""
import numpy as np

from cohsim.sdp import SdpProblem, solve
from cohsim.sdp.problem import MatExpr

rng = np.random.default_rng(0)


def lam_max(d_target):
    # min t s.t. t*I - D >= 0
    p = SdpProblem()
    t = p.scalar_var("t")
    ti = p.scalar_times_eye(t, d_target.shape[0])
    p.add_psd(ti - MatExpr.constant(d_target))
    p.minimize(t)
    return solve(p)


# 1. lambda_max of diag(3,1) -> 3
sol = lam_max(np.diag([3.0, 1.0]))
print("lam_max diag(3,1):", sol.status, sol.primal_value, sol.dual_value, sol.iterations)

# 2. lambda_max of Pauli Y -> 1 (complex entries)
Y = np.array([[0, -1j], [1j, 0]])
sol = lam_max(Y)
print("lam_max Pauli Y:", sol.status, sol.primal_value, sol.dual_value, sol.iterations)

# 3. robustness dual: max tr(rho S), S >= 0, S_jj = 1, rho = |+><+| -> 2
p = SdpProblem()
S = p.psd_var("S", 2)
plus = np.full((2, 2), 0.5)
for j in range(2):
    p.add_eq(S.entry(j, j), 1.0)
p.maximize(S.inner(plus))
sol = solve(p)
print("robustness dual cosbit:", sol.status, sol.primal_value, sol.dual_value, sol.iterations)

# 4. infeasible: X >= 0 with tr X = -1
p = SdpProblem()
X = p.psd_var("X", 2)
p.add_eq(X.trace(), -1.0)
p.minimize(X.trace())
sol = solve(p)
print("infeasible toy:", sol.status, sol.diagnostics.get("certificate", {}).get("type"))

# 5. random feasibility-style SDP vs brute check: min tr(CX), tr(X)=1, X>=0  -> lambda_min(C)
for k in range(5):
    n = rng.integers(2, 6)
    C = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    C = (C + C.conj().T) / 2
    p = SdpProblem()
    X = p.psd_var("X", int(n))
    p.add_eq(X.trace(), 1.0)
    p.minimize(X.inner(C))
    sol = solve(p)
    expect = float(np.linalg.eigvalsh(C)[0])
    print(f"lam_min rand n={n}:", sol.status, sol.primal_value - expect, "gap", sol.gap, "it", sol.iterations)

# 6. unbounded: min t, no constraints
p = SdpProblem()
t = p.scalar_var("t")
p.minimize(t)
sol = solve(p)
print("unbounded scalar:", sol.status)

# 7. unbounded conic: min tr(CX), X >= 0 with C having a negative eigenvalue
p = SdpProblem()
X = p.psd_var("X", 2)
p.minimize(X.inner(np.diag([1.0, -1.0])))
sol = solve(p)
print("unbounded conic:", sol.status, sol.diagnostics.get("certificate", {}).get("type"))

# 8. partial trace constraint: max tr(J W) s.t. tr_B J = I_A, J >= 0 (qubit-qubit)
#    = max over CPTP Choi of <W, J>; for W = I/..., sanity value only
W = rng.normal(size=(4, 4))
W = (W + W.T) / 2
p = SdpProblem()
J = p.psd_var("J", 4)
p.add_matrix_eq(J.ptrace([2, 2], [0]), np.eye(2))
p.maximize(J.inner(W))
sol = solve(p)
# brute force via sampling would be loose; check dual sanity + feasibility instead
Jv = sol.block_values["J"]
from cohsim.linalg import partial_trace
print("choi feas:", sol.status, np.abs(partial_trace(Jv, [2, 2], [0]) - np.eye(2)).max(),
      float(np.linalg.eigvalsh(Jv)[0]), "gap", sol.gap)
