"""Quantum channels in Choi form, channel families, MIO predicates and the
diamond-norm distance.

The Choi matrix is unnormalized, ``J = sum_ij |i><j| (x) N(|i><j|)``, living
on input (x) output with the input factor first.  CPTP then reads
``J >= 0`` and ``tr_out J = 1_in``.  A channel is MIO (maximally incoherent)
iff it maps every incoherent state to an incoherent state, which on the Choi
matrix is the vanishing of every output off-diagonal element in the diagonal
input blocks: ``tr((|i><i| (x) |j><k|) J) = 0`` for all ``i`` and ``j != k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import linalg as la
from .sdp import DEFAULT_TOL, MatExpr, SdpProblem, solve

__all__ = [
    "Channel",
    "MioCheck",
    "from_kraus",
    "from_unitary",
    "qubit_unitary",
    "constant_channel",
    "cq_channel",
    "dephasing_channel",
    "identity_channel",
    "tensor",
    "apply_channel",
    "is_mio",
    "mio_violation",
    "diamond_distance",
    "channel_to_json",
    "channel_from_json",
    "parse_channel",
]

CPTP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Channel:
    """CPTP map in unnormalized Choi form with labeled dimensions."""

    dim_in: int
    dim_out: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        choi = la.require_hermitian(self.choi, tol=1e-8, name="Choi matrix")
        if choi.shape[0] != self.dim_in * self.dim_out:
            raise la.DimensionError(
                f"Choi dim {choi.shape[0]} != dim_in*dim_out = {self.dim_in * self.dim_out}")
        wmin = float(np.linalg.eigvalsh(choi).min())
        if wmin < -CPTP_TOL:
            raise ValueError(f"Choi matrix has negative eigenvalue {wmin:.3e}")
        marginal = la.partial_trace(choi, [self.dim_in, self.dim_out], keep=[0])
        dev = np.abs(marginal - np.eye(self.dim_in)).max()
        if dev > CPTP_TOL:
            raise ValueError(f"channel is not trace preserving (deviation {dev:.3e})")
        object.__setattr__(self, "choi", choi)


class MioCheck(NamedTuple):
    ok: bool
    max_violation: float


def from_kraus(kraus, dim_in: int | None = None, dim_out: int | None = None) -> Channel:
    """Build a channel from Kraus operators (converted to Choi immediately)."""
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    dout, din = ops[0].shape
    dim_in = din if dim_in is None else dim_in
    dim_out = dout if dim_out is None else dim_out
    choi = np.zeros((din * dout, din * dout), dtype=complex)
    for k in ops:
        v = k.T.reshape(-1)  # component (i, b) = K[b, i]
        choi += np.outer(v, v.conj())
    return Channel(dim_in, dim_out, choi)


def from_unitary(u: np.ndarray) -> Channel:
    """Unitary conjugation channel ``rho -> u rho u^dag``."""
    u = la.require_unitary(u, name="unitary")
    return from_kraus([u])


def qubit_unitary(theta: float) -> Channel:
    """The rotation ``[[c, -s], [s, c]]``, the canonical coherent qubit unitary."""
    c, s = np.cos(theta), np.sin(theta)
    return from_unitary(np.array([[c, -s], [s, c]], dtype=complex))


def constant_channel(sigma: np.ndarray, dim_in: int | None = None) -> Channel:
    """Channel mapping every input to the state ``sigma``; Choi is ``1_in (x) sigma``."""
    sigma = la.require_density(sigma, name="constant output")
    dim_in = sigma.shape[0] if dim_in is None else int(dim_in)
    return Channel(dim_in, sigma.shape[0], la.kron(np.eye(dim_in), sigma))


def cq_channel(outputs) -> Channel:
    """Measure in the incoherent basis, emit ``outputs[i]`` on outcome ``i``."""
    outs = [la.require_density(np.asarray(o), name=f"cq output {i}") for i, o in enumerate(outputs)]
    dims = {o.shape[0] for o in outs}
    if len(dims) != 1:
        raise la.DimensionError(f"cq outputs have mixed dimensions {sorted(dims)}")
    dout = dims.pop()
    din = len(outs)
    choi = np.zeros((din * dout, din * dout), dtype=complex)
    for i, o in enumerate(outs):
        choi[i * dout:(i + 1) * dout, i * dout:(i + 1) * dout] = o
    return Channel(din, dout, choi)


def dephasing_channel(dim: int) -> Channel:
    """Completely dephasing channel (measure-and-reprepare in the incoherent basis)."""
    return cq_channel([la.projector(la.ket(i, dim)) for i in range(dim)])


def identity_channel(dim: int) -> Channel:
    return from_unitary(np.eye(dim))


def tensor(a: Channel, b: Channel) -> Channel:
    """Tensor product channel; Choi factors are reordered to (in, in, out, out)."""
    j = la.kron(a.choi, b.choi)
    dims = [a.dim_in, a.dim_out, b.dim_in, b.dim_out]
    j = la.permute_factors(j, dims, [0, 2, 1, 3])
    return Channel(a.dim_in * b.dim_in, a.dim_out * b.dim_out, j)


def apply_channel(n: Channel, rho: np.ndarray) -> np.ndarray:
    """Evaluate ``N(rho) = tr_in((rho^T (x) 1) J)``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n.dim_in, n.dim_in):
        raise la.DimensionError(f"input has shape {rho.shape}, channel expects {(n.dim_in,) * 2}")
    m = la.kron(rho.T, np.eye(n.dim_out)) @ n.choi
    return la.partial_trace(m, [n.dim_in, n.dim_out], keep=[1])


def mio_constraint_indices(dim_in: int, dim_out: int):
    """Index triples (i, j, k), j < k, of the MIO Choi functionals."""
    return [(i, j, k) for i in range(dim_in) for j in range(dim_out) for k in range(j + 1, dim_out)]


def mio_violation(n: Channel) -> float:
    """Largest |tr((|i><i| (x) |j><k|) J)| over all i and j != k."""
    worst = 0.0
    d = n.dim_out
    for i in range(n.dim_in):
        block = n.choi[i * d:(i + 1) * d, i * d:(i + 1) * d]
        off = block - np.diag(np.diag(block))
        worst = max(worst, float(np.abs(off).max()))
    return worst


def is_mio(n: Channel, tol: float = 1e-9) -> MioCheck:
    """Check the MIO off-diagonal functionals of the Choi matrix."""
    v = mio_violation(n)
    return MioCheck(v <= tol, v)


def _diamond_sdp(ja: np.ndarray, jb: np.ndarray, dim_in: int, dim_out: int, tol: float) -> float:
    """min lam s.t. Z >= J_a - J_b, Z >= 0, tr_out Z <= lam*1_in."""
    p = SdpProblem()
    z = p.psd_var("Z", dim_in * dim_out)
    lam = p.scalar_var("lam")
    p.add_psd(z - MatExpr.constant(ja - jb))
    p.add_psd(p.scalar_times_eye(lam, dim_in) - z.ptrace([dim_in, dim_out], keep=[0]))
    p.minimize(lam)
    sol = solve(p, tol=tol).require_optimal()
    return float(sol.primal_value)


def diamond_distance(a: Channel, b: Channel, tol: float = DEFAULT_TOL) -> float:
    """Half diamond-norm distance ``0.5 ||a - b||_diamond`` in [0, 1].

    Solved in dual form; identical Choi matrices short-circuit to exactly 0.
    When the two solve orders disagree by more than ``2 tol`` the larger value
    is reported.
    """
    if a.dim_in != b.dim_in or a.dim_out != b.dim_out:
        raise la.DimensionError("diamond distance needs channels with matching dimensions")
    if np.array_equal(a.choi, b.choi):
        return 0.0
    v1 = _diamond_sdp(a.choi, b.choi, a.dim_in, a.dim_out, tol)
    v2 = _diamond_sdp(b.choi, a.choi, a.dim_in, a.dim_out, tol)
    val = v1 if abs(v1 - v2) <= 2 * tol else max(v1, v2)
    return float(min(max(val, 0.0), 1.0))


# -- serialization and CLI descriptors ---------------------------------------

def channel_to_json(n: Channel) -> dict:
    return {"dim_in": n.dim_in, "dim_out": n.dim_out, "choi": la.matrix_to_json(n.choi)}


def channel_from_json(obj: dict) -> Channel:
    try:
        return Channel(int(obj["dim_in"]), int(obj["dim_out"]),
                       la.matrix_from_json(obj["choi"], tol=1e-8))
    except KeyError as exc:
        raise ValueError(f"malformed channel JSON: missing {exc}") from exc


def _parse_params(body: str, descriptor: str) -> dict:
    params = {}
    if not body:
        return params
    for pos, part in enumerate(body.split(",")):
        if "=" not in part:
            raise ValueError(f"malformed descriptor {descriptor!r}: expected key=value at field {pos}")
        key, val = part.split("=", 1)
        params[key.strip()] = val.strip()
    return params


def parse_channel(descriptor: str) -> Channel:
    """Parse a CLI channel descriptor.

    Formats: ``unitary:theta=0.3927``, ``identity:d=2``, ``dephasing:d=3``,
    ``constant:file=PATH``, ``cq:files=A;B;...``, ``choi:file=PATH``.
    """
    kind, _, body = descriptor.partition(":")
    kind = kind.strip()
    params = _parse_params(body, descriptor)
    try:
        if kind == "unitary":
            return qubit_unitary(float(params["theta"]))
        if kind == "identity":
            return identity_channel(int(params["d"]))
        if kind == "dephasing":
            return dephasing_channel(int(params["d"]))
        if kind == "constant":
            return constant_channel(la.load_matrix(params["file"]))
        if kind == "cq":
            files = [f for f in params["files"].split(";") if f]
            return cq_channel([la.load_matrix(f) for f in files])
        if kind == "choi":
            import json

            with open(params["file"], encoding="utf-8") as fh:
                return channel_from_json(json.load(fh))
    except KeyError as exc:
        raise ValueError(f"malformed descriptor {descriptor!r}: missing parameter {exc}") from exc
    raise ValueError(f"malformed descriptor {descriptor!r}: unknown channel kind {kind!r}")
