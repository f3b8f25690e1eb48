"""Implementing channels with coherent resources under MIO.

Covers the cost side of the theory: exact and smoothed simulation cost with
maximally coherent resources, the amortized cost with recycling, the
best-approximation SDP for an arbitrary resource state (diamond-norm error),
the gate-fidelity SDP for unitary targets, and the SDP upper bound on the
coherence left in the output resource.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .channels import Channel, mio_constraint_indices
from .measures import channel_robustness, log_robustness, smoothed_channel_robustness
from .sdp import DEFAULT_TOL, MatExpr, SdpProblem, solve

__all__ = [
    "SimulationQuery",
    "CostReport",
    "RecyclingBound",
    "SequenceCost",
    "ResourceBelowCostError",
    "InfeasibleImplementationError",
    "simulation_rank",
    "simulation_cost",
    "amortized_cost",
    "recycling_bound",
    "sequence_cost",
    "implementation_error",
    "gate_fidelity",
    "average_gate_fidelity",
    "coherence_left_sdp",
    "cost_report",
]

# channel robustness entering ceiling/floor formulas is solved this tightly,
# so the integer guards below dominate the solver error; the measure layer
# tightens by another factor of ten internally
TIGHT_TOL = 1e-10
CEIL_GUARD = 10 * DEFAULT_TOL
FLOOR_GUARD = 1e-8


class ResourceBelowCostError(ValueError):
    """Requested cosdit resource is below the simulation cost of the channel."""


class InfeasibleImplementationError(ValueError):
    """No MIO implementation meets the requested error budget with this resource."""


@dataclass(frozen=True)
class SimulationQuery:
    """Target channel, resource state (vector or density matrix), error budget."""

    target: Channel
    resource: np.ndarray
    epsilon: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        object.__setattr__(self, "resource", np.asarray(self.resource, dtype=complex))

    def resource_density(self) -> np.ndarray:
        if self.resource.ndim == 1:
            return la.projector(la.require_pure(self.resource, name="resource"))
        return la.require_density(self.resource, name="resource")


@dataclass
class CostReport:
    sim_cost_bits: float
    amortized_cost_bits: float
    input_rank: int
    output_rank: int
    coherence_left_bound: float

    def to_dict(self) -> dict:
        return {
            "sim_cost_bits": self.sim_cost_bits,
            "amortized_cost_bits": self.amortized_cost_bits,
            "input_rank": self.input_rank,
            "output_rank": self.output_rank,
            "coherence_left_bound": self.coherence_left_bound,
        }


@dataclass
class RecyclingBound:
    max_robustness_left: float
    cosdit_rank: int


@dataclass
class SequenceCost:
    k_in: int
    k_out: int
    total_bits: float
    stage_ranks: list


def simulation_rank(n: Channel, epsilon: float = 0.0, tol: float = DEFAULT_TOL) -> int:
    """Smallest cosdit rank ``ceil(1 + C_R^eps)`` that simulates the channel.

    The ceiling is guarded against solver overshoot: a robustness reported a
    few ulps above an exact integer must not bump the rank.
    """
    r = smoothed_channel_robustness(n, epsilon, tol=tol)
    return max(1, math.ceil(1.0 + r - CEIL_GUARD))


def simulation_cost(n: Channel, epsilon: float = 0.0, tol: float = DEFAULT_TOL) -> float:
    """Exact one-shot simulation cost ``log2 ceil(1 + C_R^eps)`` in bits."""
    return float(np.log2(simulation_rank(n, epsilon, tol=tol)))


def amortized_cost(n: Channel, epsilon: float = 0.0, tol: float = DEFAULT_TOL) -> float:
    """Amortized cost with coherence recycling: the smoothed log-robustness."""
    return log_robustness(smoothed_channel_robustness(n, epsilon, tol=tol))


def recycling_bound(n: Channel, k: int, tol: float = TIGHT_TOL) -> RecyclingBound:
    """Best degraded resource recoverable from a rank-``k`` cosdit.

    The output resource can carry robustness at most ``k/(1+C_R) - 1``; if a
    cosdit output is demanded its rank is ``floor(k/(1+C_R))``.
    """
    r = channel_robustness(n, tol=tol)
    if k < math.ceil(1.0 + r - CEIL_GUARD):
        raise ResourceBelowCostError(
            f"cosdit rank {k} is below the simulation cost ceil(1+{r:.6f})")
    ratio = k / (1.0 + r)
    return RecyclingBound(max_robustness_left=ratio - 1.0,
                          cosdit_rank=max(1, math.floor(ratio + FLOOR_GUARD)))


def sequence_cost(channels, k: int, tol: float = TIGHT_TOL) -> SequenceCost:
    """On-the-fly implementation of a channel sequence from one rank-``k`` cosdit.

    Each stage consumes the cosdit left by the previous one; the total cost in
    bits is ``log2(k / k')``.  The amortized-cost sandwich
    ``sum C_amo <= log2(k/k') <= sum C_amo + n/k'`` is verified.
    """
    ranks = [int(k)]
    amo_sum = 0.0
    for idx, n in enumerate(channels):
        r = channel_robustness(n, tol=tol)
        amo_sum += log_robustness(r)
        cur = ranks[-1]
        if cur < math.ceil(1.0 + r - CEIL_GUARD):
            raise ResourceBelowCostError(
                f"stage {idx}: intermediate cosdit rank {cur} below ceil(1+{r:.6f})")
        ranks.append(max(1, math.floor(cur / (1.0 + r) + FLOOR_GUARD)))
    k_out = ranks[-1]
    total = float(np.log2(k / k_out))
    n_stages = len(ranks) - 1
    if not (amo_sum - 1e-6 <= total <= amo_sum + n_stages / k_out + 1e-6):
        raise RuntimeError(
            f"amortized-cost sandwich violated: {amo_sum} <= {total} <= {amo_sum + n_stages / k_out}")
    return SequenceCost(k_in=int(k), k_out=k_out, total_bits=total, stage_ranks=ranks[1:])


# ---------------------------------------------------------------------------
# arbitrary-resource SDPs
# ---------------------------------------------------------------------------


def _mio_choi_var(p: SdpProblem, label: str, d_in: int, d_out: int) -> MatExpr:
    """PSD Choi variable with CPTP marginal and vanishing MIO functionals."""
    jm = p.psd_var(label, d_in * d_out)
    p.add_matrix_eq(jm.ptrace([d_in, d_out], keep=[0]), np.eye(d_in))
    for i, j, k in mio_constraint_indices(d_in, d_out):
        p.add_eq(jm.entry(i * d_out + k, i * d_out + j), 0.0)
    return jm


def implementation_error(q: SimulationQuery, tol: float = DEFAULT_TOL) -> float:
    """Smallest half-diamond-norm error implementing the target with the resource.

    Minimizes ``lam`` over MIO Choi matrices ``J_M`` on resource (x) input ->
    output, with ``J_E = tr_R((w^t (x) 1) J_M)`` and the diamond-norm dual
    certificate ``Z >= J_N - J_E``, ``tr_out Z <= lam 1_in``, ``Z >= 0``.
    """
    n = q.target
    omega = q.resource_density()
    d_r = omega.shape[0]
    d_a, d_b = n.dim_in, n.dim_out
    p = SdpProblem()
    jm = _mio_choi_var(p, "J_M", d_r * d_a, d_b)
    lift = la.kron(omega.T, np.eye(d_a * d_b))
    je = jm.apply_map(lambda m: la.partial_trace(lift @ m, [d_r, d_a, d_b], keep=[1, 2]),
                      d_a * d_b)
    z = p.psd_var("Z", d_a * d_b)
    lam = p.scalar_var("lam")
    p.add_psd(z - MatExpr.constant(n.choi) + je)
    p.add_psd(p.scalar_times_eye(lam, d_a) - z.ptrace([d_a, d_b], keep=[0]))
    p.minimize(lam)
    sol = solve(p, tol=tol).require_optimal()
    return float(min(max(sol.primal_value, 0.0), 1.0))


def gate_fidelity(q: SimulationQuery, tol: float = DEFAULT_TOL) -> float:
    """Optimal gate fidelity implementing a unitary target with the resource.

    Maximizes ``tr((w^T (x) J_U) J_M) / d_A^2`` over MIO Choi matrices; the
    value is 1 exactly when an exact implementation exists.
    """
    n = q.target
    if n.dim_in != n.dim_out:
        raise la.DimensionError("gate fidelity needs a unitary (square) target")
    omega = q.resource_density()
    d_a = n.dim_in
    p = SdpProblem()
    jm = _mio_choi_var(p, "J_M", omega.shape[0] * d_a, d_a)
    p.maximize(jm.inner(la.kron(omega.T, n.choi)) * (1.0 / d_a**2))
    sol = solve(p, tol=tol).require_optimal()
    return float(min(max(sol.primal_value, 0.0), 1.0))


def average_gate_fidelity(entanglement_fidelity: float, dim: int) -> float:
    """Convert the Choi (entanglement) fidelity F to the average fidelity f."""
    return (dim * entanglement_fidelity + 1.0) / (dim + 1.0)


def coherence_left_sdp(q: SimulationQuery, d_s: int = 2, tol: float = DEFAULT_TOL) -> float:
    """Upper bound on the robustness left in the output resource.

    Relaxation of the exact (non-convex) recycling problem: ask the MIO to
    reproduce the joint output ``sigma (x) N`` within half-diamond error
    ``epsilon``, and maximize the off-diagonal sum of ``sigma``, which equals
    its robustness under these constraints.  The output resource dimension
    ``d_s`` must be fixed by the caller: letting it grow makes the bound
    diverge.
    """
    n = q.target
    omega = q.resource_density()
    d_r, d_a, d_b = omega.shape[0], n.dim_in, n.dim_out
    eps = q.epsilon
    p = SdpProblem()
    jm = _mio_choi_var(p, "J_M", d_r * d_a, d_s * d_b)
    sigma = p.psd_var("sigma", d_s)
    p.add_eq(sigma.trace(), 1.0)
    lift = la.kron(omega.T, np.eye(d_a * d_s * d_b))
    je = jm.apply_map(
        lambda m: la.partial_trace(lift @ m, [d_r, d_a, d_s, d_b], keep=[1, 2, 3]),
        d_a * d_s * d_b)
    target = sigma.kron_right(n.choi).permute([d_s, d_a, d_b], [1, 0, 2])
    z = p.psd_var("Z", d_a * d_s * d_b)
    p.add_psd(z - target + je)
    p.add_psd(MatExpr.constant(eps * np.eye(d_a)) - z.ptrace([d_a, d_s, d_b], keep=[0]))
    offsum = np.ones((d_s, d_s)) - np.eye(d_s)
    p.maximize(sigma.inner(offsum))
    sol = solve(p, tol=tol)
    if sol.status == "infeasible":
        raise InfeasibleImplementationError(
            f"no MIO reproduces the joint output within epsilon={eps} using this resource")
    sol.require_optimal()
    return max(0.0, float(sol.primal_value))


def cost_report(n: Channel, epsilon: float = 0.0, tol: float = DEFAULT_TOL) -> CostReport:
    """Simulation and amortized costs plus the recycling numbers at rank k."""
    k = simulation_rank(n, epsilon, tol=tol)
    rec = recycling_bound(n, k)
    return CostReport(
        sim_cost_bits=float(np.log2(k)),
        amortized_cost_bits=amortized_cost(n, epsilon, tol=tol),
        input_rank=k,
        output_rank=rec.cosdit_rank,
        coherence_left_bound=rec.max_robustness_left,
    )
