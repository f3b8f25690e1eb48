"""Pure-state conversion criteria under MIO and the flagpole machinery.

Flagpole states carry one amplitude ``sqrt(p)`` and ``d-1`` equal tails; they
are the extremal family for conversion thresholds.  A channel with
robustness ``C_R`` can be implemented exactly by the flagpole ``phi_p``
whenever ``p <= 1/(1 + C_R)`` (and the resource dimension exceeds the output
dimension); the construction splits the resource space into ``phi_p``, a
fixed orthogonal direction ``phi`` and the remaining complement, attaching a
CPTP map to each so that every incoherent-basis restriction is MIO.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .channels import Channel, mio_constraint_indices, mio_violation
from .measures import channel_robustness
from .sdp import DEFAULT_TOL, MatExpr, SdpProblem, solve

__all__ = [
    "FlagpoleSpec",
    "ConversionVerdict",
    "FlagpoleSimulation",
    "flagpole_state",
    "flagpole_robustness",
    "lemma1_check",
    "majorization_convertible",
    "plane_criterion",
    "mio_convertible",
    "flagpole_threshold",
    "construct_flagpole_simulation",
    "parse_state",
]

TIGHT_TOL = 1e-10
VERDICT_TOL = 1e-9


@dataclass(frozen=True)
class FlagpoleSpec:
    """Dimension and pole weight of a flagpole state."""

    d: int
    p: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"flagpole dimension must be >= 2, got {self.d}")
        if not (1.0 / self.d - 1e-12 <= self.p <= 1.0 + 1e-12):
            raise ValueError(f"flagpole weight p={self.p} outside [1/{self.d}, 1]")


@dataclass(frozen=True)
class ConversionVerdict:
    possible: str              # "yes" | "no" | "undetermined"
    criterion: str
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {"possible": self.possible, "criterion": self.criterion, "witness": self.witness}


@dataclass
class FlagpoleSimulation:
    feasible: bool
    violation: float           # optimal MIO-constraint violation of the first mixing stage
    mio: Channel | None = None
    residual: float = float("nan")


def flagpole_state(spec: FlagpoleSpec) -> np.ndarray:
    """Amplitudes ``(sqrt(p), sqrt((1-p)/(d-1)), ...)``."""
    tail = math.sqrt(max(0.0, (1.0 - spec.p) / (spec.d - 1)))
    v = np.full(spec.d, tail, dtype=complex)
    v[0] = math.sqrt(spec.p)
    return v / np.linalg.norm(v)


def flagpole_robustness(spec: FlagpoleSpec) -> float:
    """Closed-form robustness of a flagpole: ``(sum of amplitudes)^2 - 1``."""
    return float(np.abs(flagpole_state(spec)).sum() ** 2 - 1.0)


def _padded_probs(psi: np.ndarray, phi: np.ndarray):
    psi = la.require_pure(psi)
    phi = la.require_pure(phi)
    d = max(psi.size, phi.size)
    p = np.zeros(d)
    q = np.zeros(d)
    p[: psi.size] = np.abs(psi) ** 2
    q[: phi.size] = np.abs(phi) ** 2
    return p, q


def lemma1_check(psi: np.ndarray, phi: np.ndarray, tol: float = VERDICT_TOL) -> ConversionVerdict:
    """Largest-diagonal-entry monotonicity test for ``psi -> phi`` under MIO.

    Necessary only: a violation gives a firm "no"; the sufficient branch
    fires only for maximally coherent targets, where ``lambda1 <= 1/d``
    guarantees an incoherent-operation conversion.
    """
    p, q = _padded_probs(psi, phi)
    l_src, l_dst = float(p.max()), float(q.max())
    if l_src > l_dst + tol:
        return ConversionVerdict("no", "lambda1-monotone", {"lambda1_src": l_src, "lambda1_dst": l_dst})
    amps = np.abs(np.asarray(phi, dtype=complex))
    d_dst = int(np.asarray(phi).size)
    if np.abs(amps - 1.0 / math.sqrt(d_dst)).max() < 1e-9 and l_src <= 1.0 / d_dst + tol:
        return ConversionVerdict("yes", "cosdit-target", {"lambda1_src": l_src, "d": d_dst})
    return ConversionVerdict("undetermined", "lambda1-monotone")


def majorization_convertible(psi: np.ndarray, phi: np.ndarray, tol: float = VERDICT_TOL) -> bool:
    """True iff the dephased target majorizes the dephased source.

    This is the sufficient incoherent-operation criterion for the pure-state
    conversion ``psi -> phi`` (hence also MIO), on states padded to a common
    dimension.
    """
    p, q = _padded_probs(psi, phi)
    src = np.cumsum(np.sort(p)[::-1])
    dst = np.cumsum(np.sort(q)[::-1])
    return bool(np.all(dst >= src - tol))


def plane_criterion(k: int, phi: np.ndarray, tol: float = VERDICT_TOL) -> bool:
    """Cosdit dilution test: ``Psi_k -> phi`` under MIO iff ``sum sqrt(p_i) <= sqrt(k)``."""
    phi = la.require_pure(phi)
    return bool(np.abs(phi).sum() <= math.sqrt(k) + tol)


def mio_convertible(psi: np.ndarray, phi: np.ndarray, tol: float = VERDICT_TOL) -> ConversionVerdict:
    """Combined conversion verdict ``psi -> phi`` under MIO.

    Order of tests: majorization (sufficient), exact plane criterion for
    cosdit sources, lambda1 monotonicity (necessary), robustness
    monotonicity (necessary, closed form on pure states).
    """
    psi = la.require_pure(psi)
    phi = la.require_pure(phi)
    if majorization_convertible(psi, phi, tol):
        return ConversionVerdict("yes", "majorization")
    amps = np.abs(psi)
    support = amps[amps > 1e-9]
    k = support.size
    if np.abs(support - 1.0 / math.sqrt(k)).max() < 1e-9:
        # source is a cosdit (possibly zero padded); the plane criterion is
        # exact for cosdit dilutions
        ok = plane_criterion(k, phi, tol)
        return ConversionVerdict("yes" if ok else "no", "cosdit-dilution-plane",
                                 {"k": int(k), "amplitude_sum": float(np.abs(phi).sum())})
    lem = lemma1_check(psi, phi, tol)
    if lem.possible != "undetermined":
        return lem
    r_src = float(np.abs(psi).sum() ** 2 - 1.0)
    r_dst = float(np.abs(phi).sum() ** 2 - 1.0)
    if r_dst > r_src + tol:
        return ConversionVerdict("no", "robustness-monotone",
                                 {"c_r_src": r_src, "c_r_dst": r_dst})
    return ConversionVerdict("undetermined", "all-criteria-exhausted")


def flagpole_threshold(n: Channel, tol: float = TIGHT_TOL) -> float:
    """Largest flagpole weight guaranteed to implement the channel: ``1/(1+C_R)``."""
    return 1.0 / (1.0 + channel_robustness(n, tol=tol))


# ---------------------------------------------------------------------------
# constructive simulation from a flagpole resource
# ---------------------------------------------------------------------------


def _min_violation_mixture(weight_target: float, j_target: np.ndarray,
                           weight_free: float, d_in: int, d_out: int,
                           tol: float) -> tuple[float, np.ndarray]:
    """Find CPTP J minimizing the MIO violation of w_t J_target + w_f J.

    Returns (optimal total violation, minimizing Choi matrix).  A zero
    optimum certifies that the mixture can be made MIO.
    """
    p = SdpProblem()
    j = p.psd_var("J", d_in * d_out)
    p.add_matrix_eq(j.ptrace([d_in, d_out], keep=[0]), np.eye(d_in))
    mix = j * weight_free + MatExpr.constant(weight_target * j_target)
    total = None
    for idx, (i, jj, k) in enumerate(mio_constraint_indices(d_in, d_out)):
        entry = mix.entry(i * d_out + k, i * d_out + jj)
        # real and imaginary parts, each split as a difference of nonnegatives
        for comp in range(2):
            sp = p.psd_var(f"sp_{idx}_{comp}", 1, complex_block=False)
            sm = p.psd_var(f"sm_{idx}_{comp}", 1, complex_block=False)
            val = entry * (1.0 if comp == 0 else -1j)
            p.add_eq_real(val - sp.entry(0, 0) + sm.entry(0, 0), 0.0)
            step = sp.entry(0, 0) + sm.entry(0, 0)
            total = step if total is None else total + step
    if total is None:
        return 0.0, np.eye(d_in * d_out, dtype=complex)  # no MIO constraints at all
    p.minimize(total)
    sol = solve(p, tol=tol).require_optimal()
    return max(0.0, float(sol.primal_value)), sol.block_values["J"]


def construct_flagpole_simulation(n: Channel, spec: FlagpoleSpec,
                                  tol: float = DEFAULT_TOL,
                                  feas_tol: float = 1e-6) -> FlagpoleSimulation:
    """Build the MIO implementing ``n`` from the flagpole resource, if one exists.

    Stage one searches a CPTP ``L1`` making ``p N + (1-p) L1`` MIO (possible
    iff ``p <= 1/(1+C_R(N))``); stage two does the same for the complement
    direction.  Infeasibility is reported quantitatively as the minimal
    achievable MIO-constraint violation of stage one.
    """
    if spec.d <= n.dim_out:
        raise la.DimensionError(
            f"flagpole dimension {spec.d} must exceed the channel output dimension {n.dim_out}")
    d, pval = spec.d, spec.p
    d_a, d_b = n.dim_in, n.dim_out

    v1, j_l1 = _min_violation_mixture(pval, n.choi, 1.0 - pval, d_a, d_b, tol)
    if v1 > feas_tol:
        return FlagpoleSimulation(feasible=False, violation=v1)

    j_np = (1.0 - pval) * n.choi + pval * j_l1
    w = (d - 2) / (d - 1)
    if w > 0:
        v2, j_l2 = _min_violation_mixture(1.0 / (d - 1), j_np, w, d_a, d_b, tol)
        if v2 > feas_tol:
            return FlagpoleSimulation(feasible=False, violation=max(v1, v2))
    else:
        # d = 2: no complement direction; the second condition is that
        # (1-p) N + p L1 itself is MIO, which stage one does not enforce
        v2 = mio_violation(Channel(d_a, d_b, la.hermitian_part(j_np)))
        j_l2 = np.zeros_like(j_np)
        if v2 > feas_tol:
            return FlagpoleSimulation(feasible=False, violation=max(v1, v2))

    pole = flagpole_state(spec)
    phi = np.full(d, -math.sqrt(pval / (d - 1)), dtype=complex)
    phi[0] = math.sqrt(1.0 - pval)
    proj_pole = la.projector(pole)
    proj_phi = la.projector(phi)
    proj_rest = np.eye(d) - proj_pole - proj_phi

    j_m = (la.kron(proj_pole.T, n.choi) + la.kron(proj_phi.T, j_l1)
           + la.kron(proj_rest.T, j_l2))
    mio = Channel(d * d_a, d_b, la.hermitian_part(j_m))

    lift = la.kron(proj_pole.T, np.eye(d_a * d_b))
    j_induced = la.partial_trace(lift @ mio.choi, [d, d_a, d_b], keep=[1, 2])
    residual = max(mio_violation(mio), float(np.abs(j_induced - n.choi).max()))
    return FlagpoleSimulation(feasible=True, violation=v1, mio=mio, residual=residual)


# ---------------------------------------------------------------------------
# CLI state descriptors
# ---------------------------------------------------------------------------


def parse_state(descriptor: str) -> np.ndarray:
    """Parse a CLI state descriptor into a state vector or density matrix.

    Formats: ``cosdit:d=3``, ``basis:d=3,i=0``, ``flagpole:d=3,p=0.6``,
    ``pure:amps=0.6;0.8`` (real amplitudes, normalized if close to unit) and
    ``file=PATH`` (density-matrix JSON).
    """
    kind, _, body = descriptor.partition(":")
    kind = kind.strip()
    if kind == "file" or descriptor.startswith("file="):
        _, _, path = descriptor.partition("=")
        return la.load_matrix(path)
    params = {}
    for pos, part in enumerate(body.split(",") if body else []):
        if "=" not in part:
            raise ValueError(f"malformed descriptor {descriptor!r}: expected key=value at field {pos}")
        key, val = part.split("=", 1)
        params[key.strip()] = val.strip()
    try:
        if kind == "cosdit":
            return la.cosdit(int(params["d"]))
        if kind == "basis":
            return la.ket(int(params["i"]), int(params["d"]))
        if kind == "flagpole":
            return flagpole_state(FlagpoleSpec(int(params["d"]), float(params["p"])))
        if kind == "pure":
            amps = np.array([float(a) for a in params["amps"].split(";") if a], dtype=complex)
            nrm = float(np.linalg.norm(amps))
            if abs(nrm - 1.0) > 1e-6 and nrm > 0:
                amps = amps / nrm
            return la.require_pure(amps, name=f"descriptor {descriptor!r}")
    except KeyError as exc:
        raise ValueError(f"malformed descriptor {descriptor!r}: missing parameter {exc}") from exc
    raise ValueError(f"malformed descriptor {descriptor!r}: unknown state kind {kind!r}")
