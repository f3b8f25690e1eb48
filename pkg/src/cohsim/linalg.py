"""Dense complex matrix kernel: Hermitian algebra, tensor products, partial
traces, eigendecomposition and dephasing.

Conventions used by every module in the package:

* The incoherent basis is the computational basis of each labeled factor.
* Composite systems order input factors first, output factors last; matrices
  are dense, row-major.  ``partial_trace``/``permute_factors`` index factors
  by position in ``dims``.
* Hermitian inputs are symmetrized as ``(m + m^dag)/2`` on entry, but a
  deviation beyond the tolerance is an error, never silently repaired.
"""

from __future__ import annotations

import json

import numpy as np

HERMITIAN_TOL = 1e-10
PURE_TOL = 1e-10
UNITARY_TOL = 1e-9

__all__ = [
    "DimensionError",
    "HermiticityError",
    "hermitian_part",
    "require_hermitian",
    "require_density",
    "require_pure",
    "require_unitary",
    "kron",
    "partial_trace",
    "permute_factors",
    "dephase",
    "eig_hermitian",
    "trace_norm",
    "ket",
    "cosdit",
    "projector",
    "matrix_to_json",
    "matrix_from_json",
    "load_matrix",
    "dump_matrix",
]


class DimensionError(ValueError):
    """Incompatible or non-factorizable matrix dimensions."""


class HermiticityError(ValueError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """Return ``(m + m^dag)/2``."""
    m = np.asarray(m, dtype=complex)
    return (m + m.conj().T) / 2


def require_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    """Validate Hermiticity within ``tol`` and return the symmetrized matrix.

    SDP iterates accumulate roundoff, so the symmetrization is applied
    unconditionally; only a deviation beyond ``tol`` raises.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError(f"{name} has non-finite entries")
    dev = np.abs(m - m.conj().T).max()
    if dev > tol:
        raise HermiticityError(f"{name} deviates from Hermitian by {dev:.3e} (tol {tol:.1e})")
    return hermitian_part(m)


def require_density(rho: np.ndarray, tol: float = 1e-8, name: str = "state") -> np.ndarray:
    """Validate a density matrix: Hermitian, trace one, eigenvalues >= -tol."""
    rho = require_hermitian(rho, name=name)
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"{name} has trace {tr:.6g}, expected 1")
    wmin = float(np.linalg.eigvalsh(rho).min())
    if wmin < -tol:
        raise ValueError(f"{name} has negative eigenvalue {wmin:.3e}")
    return rho


def require_pure(psi: np.ndarray, tol: float = PURE_TOL, name: str = "pure state") -> np.ndarray:
    """Validate a unit-norm state vector."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    nrm = float(np.linalg.norm(psi))
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"{name} has norm {nrm:.12g}, expected 1")
    return psi


def require_unitary(u: np.ndarray, tol: float = UNITARY_TOL, name: str = "matrix") -> np.ndarray:
    """Validate ``u^dag u = 1`` within ``tol``."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {u.shape}")
    dev = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if dev > tol:
        raise ValueError(f"{name} is not unitary (deviation {dev:.3e})")
    return u


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the standard row-major factor ordering."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _factor_shape(m: np.ndarray, dims) -> tuple:
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != m.shape[0]:
        raise DimensionError(f"factor dims {dims} do not multiply to matrix dim {m.shape[0]}")
    return dims


def partial_trace(m: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out all factors not listed in ``keep``.

    ``dims`` lists the factor dimensions in tensor order; ``keep`` is a set of
    factor indices.  Kept factors stay in their original relative order.  The
    full trace (``keep`` empty) returns a 1x1 matrix.
    """
    m = np.asarray(m, dtype=complex)
    dims = _factor_shape(m, dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in range(n) if i in keep] + [i + n for i in range(n) if i in keep]
    res = np.einsum(t, row + col, out)
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return res.reshape(d_keep, d_keep)


def permute_factors(m: np.ndarray, dims, perm) -> np.ndarray:
    """Reorder tensor factors of a matrix: factor ``perm[i]`` moves to slot ``i``."""
    m = np.asarray(m, dtype=complex)
    dims = _factor_shape(m, dims)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(len(dims))):
        raise DimensionError(f"perm {perm} is not a permutation of {len(dims)} factors")
    n = len(dims)
    t = m.reshape(dims + dims)
    t = t.transpose(perm + [p + n for p in perm])
    d = int(np.prod(dims))
    return t.reshape(d, d)


def dephase(m: np.ndarray) -> np.ndarray:
    """Erase all off-diagonal elements (the completely dephasing map)."""
    m = np.asarray(m, dtype=complex)
    return np.diag(np.diag(m))


def eig_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with real eigenvalues ``w`` sorted descending and
    eigenvector columns ``v`` so that ``m = v @ diag(w) @ v^dag``.
    """
    m = require_hermitian(m, tol=tol)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # iteration cap inside LAPACK
        raise ValueError(f"eigendecomposition did not converge: {exc}") from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def trace_norm(m: np.ndarray) -> float:
    """``||m||_1``; for Hermitian input this is the sum of |eigenvalues|."""
    m = np.asarray(m, dtype=complex)
    if np.abs(m - m.conj().T).max() < 1e-12:
        return float(np.abs(np.linalg.eigvalsh(hermitian_part(m))).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def ket(i: int, dim: int) -> np.ndarray:
    """Computational basis vector |i> in dimension ``dim``."""
    if not 0 <= i < dim:
        raise DimensionError(f"basis index {i} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def cosdit(dim: int) -> np.ndarray:
    """Maximally coherent state vector with ``dim`` uniform amplitudes."""
    if dim < 1:
        raise DimensionError("cosdit dimension must be >= 1")
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)


def projector(psi: np.ndarray) -> np.ndarray:
    """Rank-one projector |psi><psi|."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def matrix_to_json(m: np.ndarray) -> dict:
    """Serialize a Hermitian matrix as ``{"dim", "re", "im"}``."""
    m = require_hermitian(m)
    return {
        "dim": int(m.shape[0]),
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }


def matrix_from_json(obj: dict, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Parse the JSON matrix format, rejecting non-Hermitian input."""
    try:
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise DimensionError(f"matrix JSON claims dim {dim} but arrays have shapes {re.shape}, {im.shape}")
    return require_hermitian(re + 1j * im, tol=tol, name="matrix JSON payload")


def dump_matrix(m: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_json(m), fh)


def load_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return matrix_from_json(json.load(fh))
